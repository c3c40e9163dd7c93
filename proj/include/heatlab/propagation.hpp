#pragma once

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "heatlab/doubling.hpp"
#include "heatlab/opnorm.hpp"

namespace heatlab {

/// Distance between two variable sets of a generator.
inline double set_distance(const Generator& g, const std::vector<Index>& U1, const std::vector<Index>& U2) {
    double d = kInf;
    for (Index i : U1)
        for (Index j : U2) d = std::min(d, g.dist(i, j));
    return d;
}

/// sup |⟨e^{−tL}f1, f2⟩|/(‖f1‖‖f2‖) over f_i ∈ L²(U_i), times exp(d(U1,U2)²/4t).
inline double davies_gaffney_ratio(const SpectralDecomposition& sd, double t, const std::vector<Index>& U1,
                                   const std::vector<Index>& U2) {
    if (U1.empty() || U2.empty()) throw InputError("davies_gaffney_ratio: empty subset");
    if (!(t > 0.0)) throw InputError("davies_gaffney_ratio: t must be > 0");
    const KernelOperator H = heat_operator(sd, t);
    const Vec& mu = sd.mu();
    Mat B(static_cast<Index>(U2.size()), static_cast<Index>(U1.size()));
    for (std::size_t i = 0; i < U2.size(); ++i)
        for (std::size_t j = 0; j < U1.size(); ++j)
            B(static_cast<Index>(i), static_cast<Index>(j)) =
                std::sqrt(mu(U2[i])) * H.K(U2[i], U1[j]) * std::sqrt(mu(U1[j]));
    Eigen::BDCSVD<Mat> svd(B);
    const double s = svd.singularValues()(0);
    const double d = set_distance(sd.generator(), U1, U2);
    return s * std::exp(d * d / (4.0 * t));
}

/// max_x ‖χ_{d(x,·) > r+slack} T δ_x‖₂ / ‖T δ_x‖₂; zero certifies supp T ⊆ D_{r+slack}.
inline double propagation_residual(const Generator& g, const KernelOperator& T, double r, double slack) {
    if (!(r >= 0.0) || !(slack >= 0.0)) throw InputError("propagation_residual: r and slack must be >= 0");
    double worst = 0.0;
    const double R = r + slack;
    for (Index x = 0; x < g.size(); ++x) {
        double out = 0.0, all = 0.0;
        for (Index y = 0; y < g.size(); ++y) {
            const double v = T.K(y, x) * g.mu(x);
            const double w = v * v * g.mu(y);
            all += w;
            if (g.dist(x, y) > R) out += w;
        }
        if (all > 0.0) worst = std::max(worst, std::sqrt(out / all));
    }
    return worst;
}

struct BlockNormBound {
    NormBounds global;
    NormBounds local;   ///< sup_x ‖T χ_{B(x,r)}‖ (componentwise sup of lower and upper)
    Index local_arg = -1;
    int K0 = 0;         ///< max_i #{j : d(x_i, x_j) ≤ 3r} for a greedy r/2-net
    bool holds = false; ///< global.upper ≤ K0 · local.upper (exact pairs: values coincide)
};

/// Global norm against localized norms for an operator supported in D_r.
inline BlockNormBound block_norm_bound(const Generator& g, const KernelOperator& T, double r, double p, double q,
                                       const OpnormOptions& opt = {}) {
    if (!(r > 0.0)) throw InputError("block_norm_bound: r must be > 0");
    if (propagation_residual(g, T, r, 0.0) > 1e-10)
        throw PreconditionError("block_norm_bound: operator is not supported in D_r");
    BlockNormBound out;
    out.global = opnorm(T, p, q, opt);
    out.local.lower.value = out.local.upper.value = 0.0;
    for (Index x = 0; x < g.size(); ++x) {
        Vec chi = Vec::Zero(g.size());
        for (Index y = 0; y < g.size(); ++y)
            if (g.dist(x, y) < r) chi(y) = 1.0;
        const NormBounds nb = opnorm(weighted_kernel(T, Vec::Ones(g.size()), chi), p, q, opt);
        if (nb.upper.value > out.local.upper.value || out.local_arg < 0) {
            out.local.upper = nb.upper;
            out.local_arg = x;
        }
        if (nb.lower.value > out.local.lower.value) out.local.lower = nb.lower;
    }
    // multiplicity from the covering argument: greedy r/2-net, neighbors within 3r
    std::vector<Index> net;
    {
        std::vector<char> covered(static_cast<std::size_t>(g.size()), 0);
        for (Index y = 0; y < g.size(); ++y) {
            if (covered[static_cast<std::size_t>(y)]) continue;
            net.push_back(y);
            for (Index z = 0; z < g.size(); ++z)
                if (g.dist(y, z) < r / 2.0) covered[static_cast<std::size_t>(z)] = 1;
        }
    }
    for (Index i : net) {
        int c = 0;
        for (Index j : net)
            if (g.dist(i, j) <= 3.0 * r) ++c;
        out.K0 = std::max(out.K0, c);
    }
    out.holds = out.global.upper.value <= out.K0 * out.local.upper.value * (1.0 + 1e-12) + 1e-300;
    return out;
}

/// max over the grid of |(1/Γ(a+1)) ∫₀^∞ (s − x²)₊^a e^{−s} ds − e^{−x²}|.
inline double transmutation_check(double a, const std::vector<double>& grid) {
    if (!(a > 0.0)) throw InputError("transmutation_check: a must be > 0");
    boost::math::quadrature::exp_sinh<double> integrator;
    const double g = std::tgamma(a + 1.0);
    double worst = 0.0;
    for (double x : grid) {
        const double x2 = x * x;
        auto f = [a, x2](double s) {
            const double u = s - x2;
            return u > 0.0 ? std::exp(a * std::log(u) - s) : 0.0;
        };
        const double val = integrator.integrate(f, x2, kInf) / g;
        worst = std::max(worst, std::abs(val - std::exp(-x2)));
    }
    return worst;
}

struct GaussianFit {
    double C = 0.0;        ///< smallest C with |p_t(x,y)|·√(mu(x)mu(y)) ≤ C e^{−d²/(Ct)} on the window
    Index arg_x = -1, arg_y = -1;
    std::size_t pairs = 0;
};

/// Fitted Gaussian constant over pairs with d(x,y) ≤ window·t for one t.
inline GaussianFit fit_gaussian_constant(const SpectralDecomposition& sd, double t, double window = 2.0) {
    const KernelOperator H = heat_operator(sd, t);
    const Generator& g = sd.generator();
    GaussianFit fit;
    for (Index x = 0; x < g.size(); ++x)
        for (Index y = 0; y < g.size(); ++y) {
            const double d = g.dist(x, y);
            if (!(d <= window * t)) continue;
            ++fit.pairs;
            // ⟨e^{−tL}δ_x, δ_y⟩ / (‖δ_x‖‖δ_y‖)
            const double val = std::abs(H.K(y, x)) * std::sqrt(g.mu(x) * g.mu(y));
            if (!(val > 0.0)) continue;
            auto rhs = [&](double C) { return C * std::exp(-d * d / (C * t)); };
            if (rhs(fit.C) >= val && fit.C > 0.0) continue;
            double lo = std::max(fit.C, 1e-12), hi = std::max(1.0, 2.0 * lo);
            while (rhs(hi) < val) hi *= 2.0;
            for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                (rhs(mid) >= val ? hi : lo) = mid;
            }
            fit.C = hi;
            fit.arg_x = x;
            fit.arg_y = y;
        }
    return fit;
}

} // namespace heatlab
