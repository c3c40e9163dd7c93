#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <mutex>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "heatlab/errors.hpp"

namespace heatlab {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Undirected edge with conductance w and metric length len.
struct Edge {
    Index a = 0;
    Index b = 0;
    double w = 1.0;
    double len = 1.0;
};

/// Finite weighted graph viewed as a metric measure space.
///
/// The object is an immutable handle; copies share the underlying data and the
/// lazily filled distance cache.
class MetricMeasureSpace {
public:
    MetricMeasureSpace() : MetricMeasureSpace(std::vector<double>{1.0}, {}) {}

    MetricMeasureSpace(std::vector<double> mu, std::vector<Edge> edges, std::string name = {})
        : d_(std::make_shared<Data>()) {
        const Index n = static_cast<Index>(mu.size());
        if (n == 0) throw InputError("space needs at least one vertex");
        d_->mu = Vec::Map(mu.data(), n);
        for (Index x = 0; x < n; ++x)
            if (!(d_->mu(x) > 0.0) || !std::isfinite(d_->mu(x)))
                throw InputError("mu must be positive and finite at every vertex");
        d_->adj.assign(static_cast<std::size_t>(n), {});
        d_->degree = Vec::Zero(n);
        std::vector<std::pair<Index, Index>> seen;
        seen.reserve(edges.size());
        for (std::size_t k = 0; k < edges.size(); ++k) {
            const Edge& e = edges[k];
            if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n) throw InputError("edge endpoint out of range");
            if (e.a == e.b) throw InputError("self loops are not allowed (w_xx = 0)");
            if (!(e.w >= 0.0) || !std::isfinite(e.w)) throw InputError("conductance must be finite and >= 0");
            if (!(e.len > 0.0) || !std::isfinite(e.len)) throw InputError("edge length must be finite and > 0");
            seen.emplace_back(std::min(e.a, e.b), std::max(e.a, e.b));
            d_->adj[static_cast<std::size_t>(e.a)].push_back({e.b, k});
            d_->adj[static_cast<std::size_t>(e.b)].push_back({e.a, k});
            d_->degree(e.a) += e.w;
            d_->degree(e.b) += e.w;
        }
        std::sort(seen.begin(), seen.end());
        if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
            throw InputError("duplicate edge");
        d_->edges = std::move(edges);
        d_->name = std::move(name);
        d_->rows.resize(static_cast<std::size_t>(n));
        label_components();
    }

    Index size() const { return d_->mu.size(); }
    const Vec& mu() const { return d_->mu; }
    double mu(Index x) const { return d_->mu(x); }
    double total_mass() const { return d_->mu.sum(); }
    const std::vector<Edge>& edges() const { return d_->edges; }
    const std::string& name() const { return d_->name; }

    /// Neighbors of x as (vertex, edge index) pairs.
    const std::vector<std::pair<Index, std::size_t>>& neighbors(Index x) const {
        return d_->adj[static_cast<std::size_t>(x)];
    }

    /// Weighted degree Σ_y w_xy.
    double weighted_degree(Index x) const { return d_->degree(x); }

    Index component(Index x) const { return d_->comp[static_cast<std::size_t>(x)]; }
    Index num_components() const { return d_->ncomp; }

    double max_edge_length() const {
        double m = 0.0;
        for (const Edge& e : d_->edges) m = std::max(m, e.len);
        return m;
    }

    /// Shortest-path distances from x; +inf across components.
    const std::vector<double>& dist_row(Index x) const {
        auto& slot = d_->rows[static_cast<std::size_t>(x)];
        {
            std::lock_guard<std::mutex> lock(d_->mutex);
            if (slot) return *slot;
        }
        auto row = std::make_unique<const std::vector<double>>(dijkstra({x}));
        std::lock_guard<std::mutex> lock(d_->mutex);
        if (!slot) slot = std::move(row);
        return *slot;
    }

    double dist(Index x, Index y) const { return dist_row(x)[static_cast<std::size_t>(y)]; }

    /// Distances to the nearest of several sources, computed without caching.
    std::vector<double> dijkstra(const std::vector<Index>& sources) const {
        const Index n = size();
        std::vector<double> d(static_cast<std::size_t>(n), kInf);
        using Item = std::pair<double, Index>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        for (Index s : sources) {
            d[static_cast<std::size_t>(s)] = 0.0;
            pq.push({0.0, s});
        }
        while (!pq.empty()) {
            auto [du, u] = pq.top();
            pq.pop();
            if (du > d[static_cast<std::size_t>(u)]) continue;
            for (auto [v, k] : neighbors(u)) {
                const double nd = du + d_->edges[k].len;
                if (nd < d[static_cast<std::size_t>(v)]) {
                    d[static_cast<std::size_t>(v)] = nd;
                    pq.push({nd, v});
                }
            }
        }
        return d;
    }

    /// Largest finite distance.
    double diameter() const {
        std::call_once(d_->diam_once, [this] {
            double m = 0.0;
            for (Index x = 0; x < size(); ++x)
                for (double v : dijkstra({x}))
                    if (std::isfinite(v)) m = std::max(m, v);
            d_->diameter = m;
        });
        return d_->diameter;
    }

    /// Matrix of the Dirichlet form, D − W, so that E(f) = fᵀ(D − W)f.
    Mat form_matrix() const {
        const Index n = size();
        Mat A = Mat::Zero(n, n);
        for (const Edge& e : d_->edges) {
            A(e.a, e.b) -= e.w;
            A(e.b, e.a) -= e.w;
        }
        for (Index x = 0; x < n; ++x) A(x, x) = d_->degree(x);
        return A;
    }

    /// Lf(x) = (1/mu(x)) Σ_y w_xy (f(x) − f(y)).
    Vec apply_generator(const Vec& f) const {
        check_dim(f);
        Vec out = Vec::Zero(size());
        for (const Edge& e : d_->edges) {
            const double flux = e.w * (f(e.a) - f(e.b));
            out(e.a) += flux;
            out(e.b) -= flux;
        }
        return out.cwiseQuotient(d_->mu);
    }

    void check_dim(const Vec& f) const {
        if (f.size() != size()) throw InputError("function dimension does not match vertex count");
    }

private:
    struct Data {
        Vec mu;
        Vec degree;
        std::vector<Edge> edges;
        std::vector<std::vector<std::pair<Index, std::size_t>>> adj;
        std::vector<Index> comp;
        Index ncomp = 0;
        std::string name;
        std::mutex mutex;
        std::vector<std::unique_ptr<const std::vector<double>>> rows;
        std::once_flag diam_once;
        double diameter = 0.0;
    };

    void label_components() {
        const Index n = size();
        d_->comp.assign(static_cast<std::size_t>(n), -1);
        Index c = 0;
        for (Index s = 0; s < n; ++s) {
            if (d_->comp[static_cast<std::size_t>(s)] >= 0) continue;
            std::vector<Index> stack{s};
            d_->comp[static_cast<std::size_t>(s)] = c;
            while (!stack.empty()) {
                Index u = stack.back();
                stack.pop_back();
                for (auto [v, k] : neighbors(u)) {
                    (void)k;
                    if (d_->comp[static_cast<std::size_t>(v)] < 0) {
                        d_->comp[static_cast<std::size_t>(v)] = c;
                        stack.push_back(v);
                    }
                }
            }
            ++c;
        }
        d_->ncomp = c;
    }

    std::shared_ptr<Data> d_;
};

/// E(f) = ½ Σ_{x,y} w_xy (f(x) − f(y))².
inline double dirichlet_energy(const MetricMeasureSpace& s, const Vec& f) {
    s.check_dim(f);
    double e = 0.0;
    for (const Edge& ed : s.edges()) {
        const double d = f(ed.a) - f(ed.b);
        e += ed.w * d * d;
    }
    return e;
}

/// L^p(mu) norm; p = +inf gives the max modulus.
inline double lp_norm(const Vec& mu, const Vec& f, double p) {
    if (!(p >= 1.0)) throw InputError("lp_norm requires p >= 1");
    if (f.size() != mu.size()) throw InputError("function dimension does not match measure");
    if (std::isinf(p)) return f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    if (p == 1.0) return f.cwiseAbs().dot(mu);
    if (p == 2.0) return std::sqrt(f.cwiseAbs2().dot(mu));
    // scale by the max modulus to stay clear of overflow for large p
    const double m = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    if (m == 0.0) return 0.0;
    double acc = 0.0;
    for (Index i = 0; i < f.size(); ++i) acc += std::pow(std::abs(f(i)) / m, p) * mu(i);
    return m * std::pow(acc, 1.0 / p);
}

inline double lp_norm(const MetricMeasureSpace& s, const Vec& f, double p) {
    s.check_dim(f);
    return lp_norm(s.mu(), f, p);
}

/// mu-weighted inner product.
inline double inner(const Vec& mu, const Vec& f, const Vec& g) {
    return f.cwiseProduct(g).dot(mu);
}

/// Open ball {y : d(x,y) < r}, ascending indices.
inline std::vector<Index> ball(const MetricMeasureSpace& s, Index x, double r) {
    if (!(r > 0.0)) throw InputError("ball radius must be positive");
    const auto& row = s.dist_row(x);
    std::vector<Index> out;
    for (Index y = 0; y < s.size(); ++y)
        if (row[static_cast<std::size_t>(y)] < r) out.push_back(y);
    return out;
}

/// Closed ball {y : d(x,y) ≤ r}.
inline std::vector<Index> closed_ball(const MetricMeasureSpace& s, Index x, double r) {
    const auto& row = s.dist_row(x);
    std::vector<Index> out;
    for (Index y = 0; y < s.size(); ++y)
        if (row[static_cast<std::size_t>(y)] <= r) out.push_back(y);
    return out;
}

/// V(x,r) = mu(B(x,r)).
inline double ball_volume(const MetricMeasureSpace& s, Index x, double r) {
    if (!(r > 0.0)) throw InputError("ball radius must be positive");
    const auto& row = s.dist_row(x);
    double v = 0.0;
    for (Index y = 0; y < s.size(); ++y)
        if (row[static_cast<std::size_t>(y)] < r) v += s.mu(y);
    return v;
}

/// Volume gauge v(x,r): positive, nondecreasing in r. Values are memoized per (x,r).
class VolumeGauge {
public:
    using Fn = std::function<double(Index, double)>;

    VolumeGauge(std::string name, Fn fn, bool monotone = true)
        : st_(std::make_shared<State>()) {
        st_->name = std::move(name);
        st_->fn = std::move(fn);
        st_->monotone = monotone;
    }

    double operator()(Index x, double r) const {
        std::uint64_t bits;
        std::memcpy(&bits, &r, sizeof bits);
        const Key key{x, bits};
        {
            std::lock_guard<std::mutex> lock(st_->mutex);
            auto it = st_->cache.find(key);
            if (it != st_->cache.end()) return it->second;
        }
        const double v = st_->fn(x, r);
        if (!(v > 0.0) || !std::isfinite(v))
            throw PreconditionError("gauge '" + st_->name + "' is not positive and finite at x=" +
                                    std::to_string(x) + ", r=" + std::to_string(r));
        std::lock_guard<std::mutex> lock(st_->mutex);
        st_->cache.emplace(key, v);
        return v;
    }

    /// Values v(x_i, r) for the listed vertices.
    Vec at(const std::vector<Index>& vertices, double r) const {
        Vec out(static_cast<Index>(vertices.size()));
        for (std::size_t i = 0; i < vertices.size(); ++i) out(static_cast<Index>(i)) = (*this)(vertices[i], r);
        return out;
    }

    const std::string& name() const { return st_->name; }
    bool monotone() const { return st_->monotone; }

private:
    struct Key {
        Index x;
        std::uint64_t r;
        bool operator==(const Key& o) const { return x == o.x && r == o.r; }
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL ^ k.r);
        }
    };
    struct State {
        std::string name;
        Fn fn;
        bool monotone = true;
        std::mutex mutex;
        std::unordered_map<Key, double, KeyHash> cache;
    };
    std::shared_ptr<State> st_;
};

/// The gauge v = V.
inline VolumeGauge ball_volume_gauge(const MetricMeasureSpace& s) {
    return VolumeGauge("V", [s](Index x, double r) { return ball_volume(s, x, r); });
}

/// Identity vertex list 0..n-1.
inline std::vector<Index> all_vertices(Index n) {
    std::vector<Index> v(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
    return v;
}

} // namespace heatlab
