#pragma once

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

#include "heatlab/space.hpp"

namespace heatlab {

/// {"vertices": N, "mu": [...], "edges": [[i, j, w, len], ...]}
inline nlohmann::json space_to_json(const MetricMeasureSpace& s) {
    nlohmann::json j;
    j["vertices"] = s.size();
    std::vector<double> mu(s.mu().data(), s.mu().data() + s.size());
    j["mu"] = mu;
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : s.edges()) edges.push_back({e.a, e.b, e.w, e.len});
    j["edges"] = std::move(edges);
    if (!s.name().empty()) j["name"] = s.name();
    return j;
}

inline MetricMeasureSpace space_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("vertices") || !j.contains("mu") || !j.contains("edges"))
        throw InputError("space JSON needs keys vertices, mu, edges");
    const auto n = j.at("vertices").get<long long>();
    auto mu = j.at("mu").get<std::vector<double>>();
    if (static_cast<long long>(mu.size()) != n) throw InputError("space JSON: mu length differs from vertices");
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || (e.size() != 3 && e.size() != 4))
            throw InputError("space JSON: each edge is [i, j, w] or [i, j, w, len]");
        Edge ed;
        ed.a = e[0].get<Index>();
        ed.b = e[1].get<Index>();
        ed.w = e[2].get<double>();
        ed.len = e.size() == 4 ? e[3].get<double>() : 1.0;
        edges.push_back(ed);
    }
    return MetricMeasureSpace(std::move(mu), std::move(edges), j.value("name", std::string{}));
}

} // namespace heatlab
