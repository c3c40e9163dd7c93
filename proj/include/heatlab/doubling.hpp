#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "heatlab/space.hpp"

namespace heatlab {

/// Measured doubling data of a gauge on a radius grid.
struct DoublingProfile {
    double C_D = 1.0;          ///< max over grid of v(x,2r)/v(x,r)
    double kappa = 0.0;        ///< upper exponent
    double kappa_prime = 0.0;  ///< lower (reverse doubling) exponent
    double C_upper = 1.0;      ///< v(x,r)/v(x,s) ≤ C_upper (r/s)^kappa on the grid
    double c_lower = 1.0;      ///< v(x,r)/v(x,s) ≥ c_lower (r/s)^kappa_prime on the grid
    double C_Dprime = 1.0;     ///< sup{v(y,r)/v(x,r) : d(x,y) ≤ r}
    std::vector<double> r_grid;
    std::vector<Index> centers;
};

/// w(r,s) = C·max{(r/s)^κ, (r/s)^κ'}.
struct TwoExponentEnvelope {
    double kappa = 0.0;
    double kappa_prime = 0.0;
    double C = 1.0;

    double operator()(double r, double s) const {
        const double q = r / s;
        return C * std::max(std::pow(q, kappa), std::pow(q, kappa_prime));
    }
};

inline TwoExponentEnvelope envelope_of(const DoublingProfile& p) {
    return {p.kappa, p.kappa_prime, p.C_upper};
}

namespace detail {
inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}
} // namespace detail

/// Doubling constant, fitted exponents and the (D'_v) constant of a gauge.
///
/// Exponents are least-squares log-log slopes per center (κ the largest, κ' the
/// smallest, clamped at 0); the constants are then set to the extreme grid ratios so
/// the two-sided bounds hold on every grid pair. `centers` defaults to all vertices.
inline DoublingProfile doubling_profile(const MetricMeasureSpace& s, const VolumeGauge& v,
                                        std::vector<double> r_grid, std::vector<Index> centers = {}) {
    if (r_grid.empty()) throw InputError("doubling_profile: empty radius grid");
    std::sort(r_grid.begin(), r_grid.end());
    r_grid.erase(std::unique(r_grid.begin(), r_grid.end()), r_grid.end());
    for (double r : r_grid)
        if (!(r > 0.0)) throw InputError("doubling_profile: radii must be positive");
    if (centers.empty()) centers = all_vertices(s.size());

    DoublingProfile P;
    P.r_grid = r_grid;
    P.centers = centers;
    const std::size_t m = r_grid.size();
    std::vector<double> logr(m);
    for (std::size_t i = 0; i < m; ++i) logr[i] = std::log(r_grid[i]);

    double kmax = -kInf, kmin = kInf;
    std::vector<std::vector<double>> logv(centers.size(), std::vector<double>(m));
    for (std::size_t c = 0; c < centers.size(); ++c) {
        const Index x = centers[c];
        for (std::size_t i = 0; i < m; ++i) {
            const double vr = v(x, r_grid[i]);
            logv[c][i] = std::log(vr);
            P.C_D = std::max(P.C_D, v(x, 2.0 * r_grid[i]) / vr);
        }
        const double k = detail::ls_slope(logr, logv[c]);
        kmax = std::max(kmax, k);
        kmin = std::min(kmin, k);
    }
    P.kappa = std::max(kmax, 0.0);
    P.kappa_prime = std::clamp(kmin, 0.0, P.kappa);

    double Cu = 1.0, cl = 1.0;
    for (std::size_t c = 0; c < centers.size(); ++c)
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j <= i; ++j) {
                const double lr = logv[c][i] - logv[c][j];
                const double lq = logr[i] - logr[j];
                Cu = std::max(Cu, std::exp(lr - P.kappa * lq));
                cl = std::min(cl, std::exp(lr - P.kappa_prime * lq));
            }
    P.C_upper = Cu;
    P.c_lower = cl;

    for (const Index x : centers)
        for (double r : r_grid) {
            const double vx = v(x, r);
            const auto& row = s.dist_row(x);
            for (Index y = 0; y < s.size(); ++y)
                if (row[static_cast<std::size_t>(y)] <= r) P.C_Dprime = std::max(P.C_Dprime, v(y, r) / vx);
        }
    return P;
}

/// Greedy net in ascending vertex order: net points are pairwise at distance ≥ radius
/// and every vertex lies at distance < radius from some net point.
inline std::vector<Index> greedy_net(const MetricMeasureSpace& s, double radius) {
    if (!(radius > 0.0)) throw InputError("greedy_net: radius must be positive");
    std::vector<Index> net;
    std::vector<char> covered(static_cast<std::size_t>(s.size()), 0);
    for (Index y = 0; y < s.size(); ++y) {
        if (covered[static_cast<std::size_t>(y)]) continue;
        net.push_back(y);
        const auto& row = s.dist_row(y);
        for (Index z = 0; z < s.size(); ++z)
            if (row[static_cast<std::size_t>(z)] < radius) covered[static_cast<std::size_t>(z)] = 1;
    }
    return net;
}

/// Net, Lipschitz cutoffs and overlap multiplicity at scale r.
struct Covering {
    double r = 0.0;
    std::vector<Index> centers;
    std::vector<Vec> cutoffs;  ///< ρ_i(y) = (1 − 4 d(y, B(x_i, r/2))/r)_+
    int K0 = 0;                ///< max_y #{i : y ∈ B(x_i, r)}
};

/// Cutoff (1 − d(y, B(x, r − 2ε))/ε)_+ with ε = r/4.
inline Vec cutoff_function(const MetricMeasureSpace& s, Index x, double r) {
    const std::vector<Index> core = ball(s, x, r / 2.0);
    const std::vector<double> d = s.dijkstra(core);
    Vec rho(s.size());
    for (Index y = 0; y < s.size(); ++y)
        rho(y) = std::max(0.0, 1.0 - 4.0 * d[static_cast<std::size_t>(y)] / r);
    return rho;
}

/// Covering by the open balls B(x_i, r/2) of a greedy r/2-net, so that Σρ_i ≥ 1.
inline Covering bounded_covering(const MetricMeasureSpace& s, double r) {
    if (!(r > 0.0)) throw InputError("bounded_covering: r must be positive");
    Covering c;
    c.r = r;
    c.centers = greedy_net(s, r / 2.0);
    std::vector<int> mult(static_cast<std::size_t>(s.size()), 0);
    for (Index x : c.centers) {
        c.cutoffs.push_back(cutoff_function(s, x, r));
        for (Index y : ball(s, x, r)) ++mult[static_cast<std::size_t>(y)];
    }
    c.K0 = *std::max_element(mult.begin(), mult.end());
    return c;
}

/// Geometric grid of n points on [a, b].
inline std::vector<double> geometric_grid(double a, double b, int n) {
    if (!(a > 0.0) || !(b >= a) || n < 1) throw InputError("geometric_grid: need 0 < a <= b and n >= 1");
    std::vector<double> g(static_cast<std::size_t>(n));
    if (n == 1) {
        g[0] = a;
        return g;
    }
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(la + (lb - la) * i / (n - 1));
    g.front() = a;
    g.back() = b;
    return g;
}

} // namespace heatlab
