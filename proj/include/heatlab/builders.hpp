#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/space.hpp"

namespace heatlab {

/// Periodic grid with mu ≡ hⁿ, conductance h^{n−2} between nearest neighbors and edge length h.
inline MetricMeasureSpace build_torus(const std::vector<int>& dims, double h = 1.0) {
    if (dims.empty()) throw InputError("build_torus: need at least one dimension");
    for (int d : dims)
        if (d < 3) throw InputError("build_torus: every side must be >= 3");
    if (!(h > 0.0)) throw InputError("build_torus: spacing must be positive");
    const int n = static_cast<int>(dims.size());
    Index N = 1;
    for (int d : dims) N *= d;
    std::vector<Index> stride(dims.size(), 1);
    for (int k = 1; k < n; ++k) stride[k] = stride[k - 1] * dims[k - 1];

    const double w = std::pow(h, n - 2);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(N) * dims.size());
    for (Index x = 0; x < N; ++x) {
        for (int k = 0; k < n; ++k) {
            const Index c = (x / stride[k]) % dims[k];
            const Index y = x + ((c + 1) % dims[k] - c) * stride[k];
            edges.push_back({x, y, w, h});
        }
    }
    std::string name = "torus";
    for (std::size_t k = 0; k < dims.size(); ++k) name += (k ? "x" : "") + std::to_string(dims[k]);
    if (dims.size() == 1) name = "ring" + std::to_string(dims[0]);
    return MetricMeasureSpace(std::vector<double>(static_cast<std::size_t>(N), std::pow(h, n)), std::move(edges),
                              name);
}

/// Unit path 0..N−1 with mu(k) = (1+k)^a.
inline MetricMeasureSpace build_halfline_weighted(int N, double a) {
    if (N < 3) throw InputError("build_halfline_weighted: N must be >= 3");
    if (!(a >= 0.0)) throw InputError("build_halfline_weighted: a must be >= 0");
    std::vector<double> mu(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) mu[static_cast<std::size_t>(k)] = std::pow(1.0 + k, a);
    std::vector<Edge> edges;
    for (int k = 0; k + 1 < N; ++k) edges.push_back({k, k + 1, 1.0, 1.0});
    return MetricMeasureSpace(std::move(mu), std::move(edges), "halfline" + std::to_string(N));
}

/// Unit path with N vertices.
inline MetricMeasureSpace build_path(int N) {
    if (N < 1) throw InputError("build_path: N must be >= 1");
    std::vector<Edge> edges;
    for (int k = 0; k + 1 < N; ++k) edges.push_back({k, k + 1, 1.0, 1.0});
    return MetricMeasureSpace(std::vector<double>(static_cast<std::size_t>(N), 1.0), std::move(edges),
                              "path" + std::to_string(N));
}

/// Complete graph with unit weights and lengths.
inline MetricMeasureSpace build_complete(int n) {
    if (n < 1) throw InputError("build_complete: n must be >= 1");
    std::vector<Edge> edges;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) edges.push_back({a, b, 1.0, 1.0});
    return MetricMeasureSpace(std::vector<double>(static_cast<std::size_t>(n), 1.0), std::move(edges),
                              "K" + std::to_string(n));
}

/// Two vertices joined by one unit edge.
inline MetricMeasureSpace build_two_vertex() {
    return MetricMeasureSpace({1.0, 1.0}, {{0, 1, 1.0, 1.0}}, "two_vertex");
}

/// Two unit tori of dimensions dimA and dimB joined through one bridge vertex.
///
/// `sides` holds one side length shared by both slabs, or one per slab. Vertices of
/// slab A come first, then slab B, then the bridge, which is adjacent to vertex 0 of
/// each slab.
inline MetricMeasureSpace build_glued(int dimA, int dimB, const std::vector<int>& sides) {
    if (dimA == dimB) throw InputError("build_glued: dimensions must differ");
    if (dimA < 1 || dimB < 1) throw InputError("build_glued: dimensions must be >= 1");
    if (sides.empty() || sides.size() > 2) throw InputError("build_glued: give one or two side lengths");
    const int sa = sides[0], sb = sides.size() == 2 ? sides[1] : sides[0];
    const MetricMeasureSpace A = build_torus(std::vector<int>(static_cast<std::size_t>(dimA), sa));
    const MetricMeasureSpace B = build_torus(std::vector<int>(static_cast<std::size_t>(dimB), sb));
    const Index na = A.size(), nb = B.size();
    std::vector<Edge> edges;
    for (const Edge& e : A.edges()) edges.push_back(e);
    for (const Edge& e : B.edges()) edges.push_back({e.a + na, e.b + na, e.w, e.len});
    const Index bridge = na + nb;
    edges.push_back({0, bridge, 1.0, 1.0});
    edges.push_back({na, bridge, 1.0, 1.0});
    return MetricMeasureSpace(std::vector<double>(static_cast<std::size_t>(na + nb + 1), 1.0), std::move(edges),
                              "glued" + std::to_string(dimA) + "_" + std::to_string(dimB));
}

/// Vicsek tree: generation 1 is the plus sign; generation g is five copies of g−1
/// glued at their arm tips. Unit weights, lengths and measure.
inline MetricMeasureSpace build_vicsek(int generations) {
    if (generations < 1) throw InputError("build_vicsek: generations must be >= 1");
    if (generations > 4) throw InputError("build_vicsek: generations capped at 4");
    using P = std::pair<int, int>;
    std::set<P> pts{{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    std::set<std::pair<P, P>> es;
    for (const P& p : pts)
        if (p != P{0, 0}) es.insert({P{0, 0}, p});
    int arm = 1;
    for (int g = 2; g <= generations; ++g) {
        const int off = 2 * arm;
        const std::vector<P> shifts{{0, 0}, {off, 0}, {-off, 0}, {0, off}, {0, -off}};
        std::set<P> np;
        std::set<std::pair<P, P>> ne;
        for (const P& s : shifts) {
            for (const P& p : pts) np.insert({p.first + s.first, p.second + s.second});
            for (const auto& [a, b] : es) {
                P a2{a.first + s.first, a.second + s.second}, b2{b.first + s.first, b.second + s.second};
                ne.insert(a2 < b2 ? std::pair{a2, b2} : std::pair{b2, a2});
            }
        }
        pts = std::move(np);
        es = std::move(ne);
        arm *= 3;
    }
    std::map<P, Index> idx;
    for (const P& p : pts) idx.emplace(p, static_cast<Index>(idx.size()));
    std::vector<Edge> edges;
    for (const auto& [a, b] : es) edges.push_back({idx.at(a), idx.at(b), 1.0, 1.0});
    return MetricMeasureSpace(std::vector<double>(pts.size(), 1.0), std::move(edges),
                              "vicsek" + std::to_string(generations));
}

} // namespace heatlab
