#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "heatlab/builders.hpp"
#include "heatlab/doubling.hpp"
#include "heatlab/estimate.hpp"
#include "heatlab/gauges.hpp"
#include "heatlab/space_io.hpp"

namespace heatlab::lab {

using nlohmann::json;

/// Config that does not match the schema; `path` is a JSON pointer to the offending key.
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string path, const std::string& msg)
        : std::runtime_error((path.empty() ? std::string("/") : path) + ": " + msg), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

inline const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s{"identities", "full", "propagation", "gluing", "nash_machine"};
    return s;
}

/// Pass/fail thresholds used by the check rows.
struct Tolerances {
    double tstar = 1e-9;             ///< relative gap of the three T*T sides
    double semigroup = 1e-10;        ///< relative error of e^{-sL}e^{-tL} = e^{-(s+t)L}
    double symmetry = 1e-12;         ///< kernel symmetry and Cauchy-Schwarz slack, relative to the largest entry
    double duality = 1e-10;          ///< relative gap of the weighted norm and its dual
    double resolvent = 1e-9;         ///< semigroup GN side <= resolvent side + this
    double propagation = 0.0;        ///< support residual of L^k outside k hops
    double block_norm = 1e-12;       ///< relative slack of the block norm inequality
    double extrapolation_spread = 4.0;
    bool has_gaussian = false;       ///< fitted Davies-Gaffney constant must lie in [gaussian_lo, gaussian_hi]
    double gaussian_lo = 0.0, gaussian_hi = 0.0;
};

struct LabConfig {
    json space;                      ///< builder spec, validated
    GaugeSpec gauge;
    std::vector<double> t_grid, r_grid;
    std::vector<double> ball_radii;
    json ball_centers = "all";       ///< "all", an index list, or {"net": radius}
    std::vector<double> gluing_r;    ///< defaults to r_grid
    std::vector<double> q_list{4.0, kInf};
    double alpha = 1.0;
    int gluing_trials = 20;
    std::vector<std::string> suites;
    std::uint64_t seed = 0;
    std::string output = "heatlab_out";
    Tolerances tol;
    json raw;                        ///< the validated document after overrides
};

namespace detail {

inline std::string join(const std::string& path, const std::string& key) { return path + "/" + key; }

inline void only_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key())) throw SchemaError(join(path, it.key()), "unknown key");
}

inline const json& need(const json& j, const std::string& path, const std::string& key) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    if (!j.contains(key)) throw SchemaError(join(path, key), "missing required key");
    return j.at(key);
}

inline double number(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string() && (j.get<std::string>() == "inf" || j.get<std::string>() == "infinity")) return kInf;
    throw SchemaError(path, "expected a number");
}

inline double positive(const json& j, const std::string& path) {
    const double v = number(j, path);
    if (!(v > 0.0)) throw SchemaError(path, "expected a positive number");
    return v;
}

inline int integer(const json& j, const std::string& path, int lo) {
    if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
    const long long v = j.get<long long>();
    if (v < lo || v > 1000000) throw SchemaError(path, "integer out of range (minimum " + std::to_string(lo) + ")");
    return static_cast<int>(v);
}

inline std::vector<int> int_list(const json& j, const std::string& path, int lo) {
    if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a non-empty integer array");
    std::vector<int> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], join(path, std::to_string(i)), lo));
    return out;
}

/// Either a list of positive numbers or {"geometric": [a, b, n]} / {"linear": [a, b, n]}.
inline std::vector<double> grid(const json& j, const std::string& path) {
    std::vector<double> out;
    if (j.is_array()) {
        if (j.empty()) throw SchemaError(path, "grid must not be empty");
        for (std::size_t i = 0; i < j.size(); ++i) out.push_back(positive(j[i], join(path, std::to_string(i))));
        return out;
    }
    if (!j.is_object() || j.size() != 1) throw SchemaError(path, "grid is an array or {\"geometric\"|\"linear\": [a, b, n]}");
    const std::string kind = j.begin().key();
    const json& a = j.begin().value();
    const std::string p = join(path, kind);
    if (kind != "geometric" && kind != "linear") throw SchemaError(p, "unknown grid descriptor");
    if (!a.is_array() || a.size() != 3) throw SchemaError(p, "expected [from, to, points]");
    const double lo = positive(a[0], join(p, "0")), hi = positive(a[1], join(p, "1"));
    const int n = integer(a[2], join(p, "2"), 1);
    if (hi < lo) throw SchemaError(p, "need from <= to");
    if (kind == "geometric") return geometric_grid(lo, hi, n);
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return out;
}

inline void check_space(const json& sp, const std::string& path) {
    if (!sp.is_object()) throw SchemaError(path, "expected an object");
    const json& b = need(sp, path, "builder");
    if (!b.is_string()) throw SchemaError(join(path, "builder"), "expected a string");
    const std::string kind = b.get<std::string>();
    static const std::map<std::string, std::set<std::string>> keys{
        {"two_vertex", {}},          {"torus", {"dims", "h"}},       {"path", {"N"}},
        {"complete", {"n"}},         {"halfline", {"N", "a"}},       {"glued", {"dimA", "dimB", "sides"}},
        {"vicsek", {"generations"}}, {"inline", {"vertices", "mu", "edges", "name"}}};
    const auto it = keys.find(kind);
    if (it == keys.end()) throw SchemaError(join(path, "builder"), "unknown builder '" + kind + "'");
    std::set<std::string> allowed = it->second;
    allowed.insert("builder");
    only_keys(sp, path, allowed);
    if (kind == "torus") {
        int_list(need(sp, path, "dims"), join(path, "dims"), 1);
        if (sp.contains("h")) positive(sp["h"], join(path, "h"));
    } else if (kind == "path" || kind == "halfline") {
        integer(need(sp, path, "N"), join(path, "N"), 1);
        if (kind == "halfline") number(need(sp, path, "a"), join(path, "a"));
    } else if (kind == "complete") {
        integer(need(sp, path, "n"), join(path, "n"), 1);
    } else if (kind == "glued") {
        integer(need(sp, path, "dimA"), join(path, "dimA"), 1);
        integer(need(sp, path, "dimB"), join(path, "dimB"), 1);
        int_list(need(sp, path, "sides"), join(path, "sides"), 1);
    } else if (kind == "vicsek") {
        integer(need(sp, path, "generations"), join(path, "generations"), 1);
    } else if (kind == "inline") {
        need(sp, path, "vertices");
        need(sp, path, "mu");
        need(sp, path, "edges");
    }
}

inline GaugeSpec parse_gauge(const json& j, const std::string& path) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    only_keys(j, path, {"kind", "alpha", "beta", "r0", "n", "radii", "values"});
    const json& k = need(j, path, "kind");
    static const std::map<std::string, GaugeKind> kinds{{"ball_volume", GaugeKind::ball_volume},
                                                        {"power_of_ball_volume", GaugeKind::power_of_ball_volume},
                                                        {"capped_ball_volume", GaugeKind::capped_ball_volume},
                                                        {"uniform_power", GaugeKind::uniform_power},
                                                        {"custom_table", GaugeKind::custom_table}};
    if (!k.is_string() || !kinds.count(k.get<std::string>()))
        throw SchemaError(join(path, "kind"), "expected one of ball_volume, power_of_ball_volume, capped_ball_volume, "
                                              "uniform_power, custom_table");
    GaugeSpec g;
    g.kind = kinds.at(k.get<std::string>());
    if (j.contains("alpha")) g.alpha = positive(j["alpha"], join(path, "alpha"));
    if (j.contains("beta")) g.beta = positive(j["beta"], join(path, "beta"));
    if (j.contains("r0")) g.r0 = positive(j["r0"], join(path, "r0"));
    if (j.contains("n")) {
        g.n = number(j["n"], join(path, "n"));
        if (!(g.n >= 0.0) || !std::isfinite(g.n)) throw SchemaError(join(path, "n"), "expected a finite n >= 0");
    }
    if (g.kind == GaugeKind::custom_table) {
        g.radii = grid(need(j, path, "radii"), join(path, "radii"));
        const json& v = need(j, path, "values");
        if (!v.is_array()) throw SchemaError(join(path, "values"), "expected an array of rows");
        for (std::size_t i = 0; i < v.size(); ++i) {
            const std::string p = join(join(path, "values"), std::to_string(i));
            if (!v[i].is_array()) throw SchemaError(p, "expected an array");
            std::vector<double> row;
            for (std::size_t k2 = 0; k2 < v[i].size(); ++k2) row.push_back(positive(v[i][k2], join(p, std::to_string(k2))));
            g.values.push_back(std::move(row));
        }
    }
    return g;
}

inline void parse_tolerances(const json& j, const std::string& path, Tolerances& t) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    only_keys(j, path, {"tstar", "semigroup", "symmetry", "duality", "resolvent", "propagation", "block_norm",
                        "extrapolation_spread", "gaussian_C"});
    auto nonneg = [&](const char* key, double& dst) {
        if (!j.contains(key)) return;
        dst = number(j[key], join(path, key));
        if (!(dst >= 0.0)) throw SchemaError(join(path, key), "expected a number >= 0");
    };
    nonneg("tstar", t.tstar);
    nonneg("semigroup", t.semigroup);
    nonneg("symmetry", t.symmetry);
    nonneg("duality", t.duality);
    nonneg("resolvent", t.resolvent);
    nonneg("propagation", t.propagation);
    nonneg("block_norm", t.block_norm);
    nonneg("extrapolation_spread", t.extrapolation_spread);
    if (j.contains("gaussian_C")) {
        const json& g = j["gaussian_C"];
        const std::string p = join(path, "gaussian_C");
        if (!g.is_array() || g.size() != 2) throw SchemaError(p, "expected [lo, hi]");
        t.gaussian_lo = number(g[0], join(p, "0"));
        t.gaussian_hi = number(g[1], join(p, "1"));
        if (!(t.gaussian_lo <= t.gaussian_hi)) throw SchemaError(p, "need lo <= hi");
        t.has_gaussian = true;
    }
}

} // namespace detail

/// Validate a parsed document and convert it to a LabConfig.
inline LabConfig parse_config(const json& j) {
    using namespace detail;
    if (!j.is_object()) throw SchemaError("", "config must be a JSON object");
    only_keys(j, "", {"space", "gauge", "grids", "suites", "seed", "output", "tolerances", "options"});
    LabConfig c;
    c.raw = j;
    check_space(need(j, "", "space"), "/space");
    c.space = j.at("space");
    c.gauge = parse_gauge(need(j, "", "gauge"), "/gauge");

    const json& g = need(j, "", "grids");
    if (!g.is_object()) throw SchemaError("/grids", "expected an object");
    only_keys(g, "/grids", {"t_grid", "r_grid", "ball_grid", "gluing_r"});
    c.t_grid = grid(need(g, "/grids", "t_grid"), "/grids/t_grid");
    c.r_grid = grid(need(g, "/grids", "r_grid"), "/grids/r_grid");
    const json& bg = need(g, "/grids", "ball_grid");
    if (!bg.is_object()) throw SchemaError("/grids/ball_grid", "expected an object");
    only_keys(bg, "/grids/ball_grid", {"centers", "radii"});
    c.ball_radii = grid(need(bg, "/grids/ball_grid", "radii"), "/grids/ball_grid/radii");
    if (bg.contains("centers")) {
        const json& ce = bg["centers"];
        const std::string p = "/grids/ball_grid/centers";
        if (ce.is_string()) {
            if (ce.get<std::string>() != "all") throw SchemaError(p, "expected \"all\", an index list or {\"net\": r}");
        } else if (ce.is_array()) {
            int_list(ce, p, 0);
        } else if (ce.is_object()) {
            only_keys(ce, p, {"net"});
            positive(need(ce, p, "net"), p + "/net");
        } else {
            throw SchemaError(p, "expected \"all\", an index list or {\"net\": r}");
        }
        c.ball_centers = ce;
    }
    c.gluing_r = g.contains("gluing_r") ? grid(g["gluing_r"], "/grids/gluing_r") : c.r_grid;

    const json& s = need(j, "", "suites");
    if (!s.is_array() || s.empty()) throw SchemaError("/suites", "expected a non-empty array of suite names");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string p = "/suites/" + std::to_string(i);
        if (!s[i].is_string()) throw SchemaError(p, "expected a string");
        const std::string name = s[i].get<std::string>();
        const auto& ks = known_suites();
        if (std::find(ks.begin(), ks.end(), name) == ks.end()) throw SchemaError(p, "unknown suite '" + name + "'");
        c.suites.push_back(name);
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
            throw SchemaError("/seed", "expected a non-negative 64-bit integer");
        c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("output")) {
        if (!j["output"].is_string() || j["output"].get<std::string>().empty())
            throw SchemaError("/output", "expected a directory path");
        c.output = j["output"].get<std::string>();
    }
    if (j.contains("tolerances")) parse_tolerances(j["tolerances"], "/tolerances", c.tol);
    if (j.contains("options")) {
        const json& o = j["options"];
        if (!o.is_object()) throw SchemaError("/options", "expected an object");
        only_keys(o, "/options", {"alpha", "q", "gluing_trials"});
        if (o.contains("alpha")) c.alpha = positive(o["alpha"], "/options/alpha");
        if (o.contains("gluing_trials")) c.gluing_trials = integer(o["gluing_trials"], "/options/gluing_trials", 1);
        if (o.contains("q")) {
            const json& q = o["q"];
            if (!q.is_array() || q.empty()) throw SchemaError("/options/q", "expected a non-empty array");
            c.q_list.clear();
            for (std::size_t i = 0; i < q.size(); ++i) {
                const double v = number(q[i], "/options/q/" + std::to_string(i));
                if (!(v > 2.0)) throw SchemaError("/options/q/" + std::to_string(i), "expected q > 2");
                c.q_list.push_back(v);
            }
        }
    }
    return c;
}

/// Apply "a.b.c=value" to a document; value is parsed as JSON, falling back to a plain string.
inline void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw SchemaError("", "override '" + assignment + "' is not key=value");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    json* node = &doc;
    std::string path;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) throw SchemaError(path, "empty component in override key '" + key + "'");
        path += "/" + part;
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(part);
            } catch (const std::exception&) {
                throw SchemaError(path, "array index expected");
            }
            if (idx >= node->size()) throw SchemaError(path, "array index out of range");
            node = &(*node)[idx];
        } else {
            if (node->is_null()) *node = json::object();
            if (!node->is_object()) throw SchemaError(path, "cannot descend into a scalar");
            node = &(*node)[part];
        }
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    *node = std::move(value);
}

inline json read_json_file(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw SchemaError("", "cannot open config '" + file + "'");
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw SchemaError("", "config '" + file + "' is not valid JSON");
    return j;
}

inline LabConfig load_config(const std::string& file, const std::vector<std::string>& overrides = {}) {
    json j = read_json_file(file);
    for (const auto& o : overrides) apply_override(j, o);
    return parse_config(j);
}

/// Builder dispatch for a validated space spec.
inline MetricMeasureSpace build_space(const json& sp) {
    const std::string kind = sp.at("builder").get<std::string>();
    try {
        if (kind == "two_vertex") return build_two_vertex();
        if (kind == "torus") return build_torus(sp.at("dims").get<std::vector<int>>(), sp.value("h", 1.0));
        if (kind == "path") return build_path(sp.at("N").get<int>());
        if (kind == "complete") return build_complete(sp.at("n").get<int>());
        if (kind == "halfline") return build_halfline_weighted(sp.at("N").get<int>(), sp.at("a").get<double>());
        if (kind == "glued")
            return build_glued(sp.at("dimA").get<int>(), sp.at("dimB").get<int>(), sp.at("sides").get<std::vector<int>>());
        if (kind == "vicsek") return build_vicsek(sp.at("generations").get<int>());
        if (kind == "inline") return space_from_json(sp);
    } catch (const InputError& e) {
        throw SchemaError("/space", e.what());
    } catch (const json::exception& e) {
        throw SchemaError("/space", e.what());
    }
    throw SchemaError("/space/builder", "unknown builder '" + kind + "'");
}

inline std::vector<Index> resolve_centers(const LabConfig& c, const MetricMeasureSpace& s) {
    const json& ce = c.ball_centers;
    if (ce.is_string()) return all_vertices(s.size());
    if (ce.is_object()) return greedy_net(s, ce.at("net").get<double>());
    std::vector<Index> out;
    for (std::size_t i = 0; i < ce.size(); ++i) {
        const Index x = ce[i].get<Index>();
        if (x >= s.size())
            throw SchemaError("/grids/ball_grid/centers/" + std::to_string(i), "vertex index out of range");
        out.push_back(x);
    }
    return out;
}

} // namespace heatlab::lab
