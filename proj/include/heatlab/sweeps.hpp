#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "heatlab/functional.hpp"
#include "heatlab/opnorm.hpp"
#include "heatlab/propagation.hpp"

namespace heatlab {

/// A = sup_t ‖e^{−tL}‖_{1→1} over the grid (exact column norms).
inline double l1_uniform_bound(const SpectralDecomposition& sd, const std::vector<double>& t_grid) {
    double A = 0.0;
    for (double t : t_grid) A = std::max(A, norm_1_to_q(heat_operator(sd, t), 1.0).value);
    return A;
}

struct GammaSweepRow {
    double p = 1.0, q = 1.0, gamma = 0.0, delta = 0.0;
    std::string which;            ///< "minus", "mid" or "plus"
    double lower = 0.0;           ///< sup_t of the lower estimates
    double upper = 0.0;           ///< sup_t of the upper estimates
    bool exact = true;            ///< every t used closed forms
    double dual_lower = 0.0;      ///< same functional at (q', p', δ)
    double dual_upper = 0.0;
    bool dual_exact = true;
    double t_argmax = 0.0;
    bool finite() const { return std::isfinite(upper); }
    /// Relative gap between the two sides when both are exact, otherwise the amount
    /// by which the certified intervals fail to overlap (0 when they do).
    double duality_gap() const {
        if (exact && dual_exact) return std::abs(upper - dual_upper) / std::max({upper, dual_upper, 1e-300});
        const double lo = std::max(lower, dual_lower), hi = std::min(upper, dual_upper);
        return lo <= hi * (1 + 1e-12) ? 0.0 : (lo - hi) / std::max(lo, 1e-300);
    }
};

struct GammaSweep {
    double A = 0.0;   ///< sup_t ‖e^{−tL}‖_{1→1}
    std::vector<GammaSweepRow> rows;
};

namespace detail {
inline void sweep_sup(const SpectralDecomposition& sd, const VolumeGauge& v, double p, double q, double gamma,
                      const std::vector<double>& t_grid, const OpnormOptions& opt, double& lo, double& hi,
                      bool& exact, double* targ) {
    lo = hi = 0.0;
    exact = true;
    for (double t : t_grid) {
        const NormBounds nb = weighted_norm_functional(sd, v, p, q, gamma, t, opt);
        lo = std::max(lo, nb.lower.value);
        if (nb.upper.value > hi) {
            hi = nb.upper.value;
            if (targ) *targ = t;
        }
        exact = exact && nb.exact();
    }
}
} // namespace detail

/// (vEv_{p,q,γ}) for γ ∈ {γ−, midpoint, γ+} and every (p, q), with the dual value at (q', p', δ).
inline GammaSweep gamma_sweep(const SpectralDecomposition& sd, const VolumeGauge& v,
                              const std::vector<std::pair<double, double>>& pq, const std::vector<double>& t_grid,
                              const OpnormOptions& opt = {}) {
    if (t_grid.empty()) throw InputError("gamma_sweep: empty t grid");
    GammaSweep out;
    out.A = l1_uniform_bound(sd, t_grid);
    if (!std::isfinite(out.A)) throw PreconditionError("gamma_sweep: semigroup is not L1-uniformly bounded");
    for (auto [p, q] : pq) {
        if (!(p >= 1.0 && q >= p)) throw InputError("gamma_sweep: need 1 <= p <= q");
        const GammaRange R = gamma_range(p, q);
        if (R.minus > R.plus + 1e-15) throw InputError("gamma_sweep: empty gamma range");
        std::vector<std::pair<std::string, double>> gammas{{"minus", R.minus}};
        if (R.plus > R.minus + 1e-15) {
            gammas.emplace_back("mid", 0.5 * (R.minus + R.plus));
            gammas.emplace_back("plus", R.plus);
        }
        for (const auto& [which, gamma] : gammas) {
            GammaSweepRow row;
            row.p = p;
            row.q = q;
            row.gamma = gamma;
            row.delta = 1.0 / p - 1.0 / q - gamma;
            row.which = which;
            detail::sweep_sup(sd, v, p, q, gamma, t_grid, opt, row.lower, row.upper, row.exact, &row.t_argmax);
            detail::sweep_sup(sd, v, conjugate(q), conjugate(p), row.delta, t_grid, opt, row.dual_lower,
                              row.dual_upper, row.dual_exact, nullptr);
            out.rows.push_back(row);
        }
    }
    return out;
}

struct CommutationReport {
    NormBounds weighted;   ///< ‖v_r^γ T v_r^{−γ}‖_{p→q}
    NormBounds plain;      ///< ‖T‖_{p→q}
    double ratio = 0.0;    ///< weighted.upper / plain.upper
    double ratio_upper = 0.0;  ///< weighted.upper / plain.lower, certified
    int K0 = 0;
    double weight_constant = 0.0;  ///< sup_x sup_{y∈B(x,2r)} v_r(y)^γ · sup_{z∈B(x,r)} v_r(z)^{−γ}
    double bound = 0.0;            ///< K0 · weight_constant
    bool holds() const { return ratio_upper <= bound * (1 + 1e-12); }
};

/// Multiplication by gauge powers against an operator supported in D_r.
///
/// The proof bound localizes with the block-norm covering (multiplicity K0) and then compares
/// the weights on B(x, 2r) with those on B(x, r): ‖v^γ T χ_{B(x,r)} v^{−γ}‖ ≤ (sup_{B(x,2r)} v^γ)(sup_{B(x,r)} v^{−γ})‖T‖.
inline CommutationReport commutation_check(const Generator& g, const VolumeGauge& v, double gamma,
                                           const KernelOperator& T, double r, double p, double q,
                                           const OpnormOptions& opt = {}) {
    if (propagation_residual(g, T, r, 0.0) > 0.0)
        throw PreconditionError("commutation_check: operator is not supported in D_r");
    CommutationReport out;
    const Vec vr = g.gauge_at(v, r);
    const Vec left = vr.array().pow(gamma).matrix();
    const Vec right = vr.array().pow(-gamma).matrix();
    out.weighted = opnorm(weighted_kernel(T, left, right), p, q, opt);
    out.plain = opnorm(T, p, q, opt);
    out.ratio = out.plain.upper.value > 0.0 ? out.weighted.upper.value / out.plain.upper.value : 1.0;
    out.ratio_upper = out.plain.lower.value > 0.0 ? out.weighted.upper.value / out.plain.lower.value : kInf;
    if (out.plain.upper.value == 0.0 && out.weighted.upper.value == 0.0) out.ratio_upper = 1.0;
    out.K0 = block_norm_bound(g, T, r, p, q, opt).K0;
    for (Index x = 0; x < g.size(); ++x) {
        double out_w = 0.0, in_w = 0.0;
        for (Index y = 0; y < g.size(); ++y) {
            const double d = g.dist(x, y);
            if (d < 2.0 * r) out_w = std::max(out_w, left(y));
            if (d < r) in_w = std::max(in_w, right(y));
        }
        out.weight_constant = std::max(out.weight_constant, out_w * in_w);
    }
    out.bound = out.K0 * out.weight_constant;
    return out;
}

struct NashFromSemigroup {
    std::vector<double> r_grid;
    std::vector<double> a;        ///< ‖e^{−r²L} v_r^{1/2}‖_{1→2}
    std::vector<double> implied;  ///< a² + 2/e, a Nash constant at scale r
};

/// Nash constant at each r implied by the (Ev_{1,2}) functional at t = r².
///
/// f = e^{−tL}f + (I − e^{−tL})f with ‖e^{−tL}f‖₂ ≤ a‖f v_r^{−1/2}‖₁ and
/// ‖(I − e^{−tL})f‖₂² ≤ sup_s (1−e^{−s})²/s · tE(f) ≤ (2/e) r²E(f); Cauchy–Schwarz gives a² + 2/e.
inline NashFromSemigroup nash_from_semigroup(const SpectralDecomposition& sd, const VolumeGauge& v,
                                             const std::vector<double>& r_grid) {
    NashFromSemigroup out;
    out.r_grid = r_grid;
    const Generator& g = sd.generator();
    for (double r : r_grid) {
        if (!(r > 0.0)) throw InputError("nash_from_semigroup: r must be > 0");
        const Vec h = g.gauge_at(v, r).cwiseSqrt();
        const double a = norm_1_to_q(weighted_kernel(heat_operator(sd, r * r), Vec::Ones(g.size()), h), 2.0).value;
        out.a.push_back(a);
        out.implied.push_back(a * a + 2.0 / std::exp(1.0));
    }
    return out;
}

} // namespace heatlab
