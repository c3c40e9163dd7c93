#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "heatlab/doubling.hpp"
#include "heatlab/estimate.hpp"
#include "heatlab/opnorm.hpp"

namespace heatlab {

// Ratios of the inequalities evaluated on a single function. Each returns NaN when
// the denominator vanishes, which the estimators count as skipped.

/// ‖f‖₂² / (‖f v_r^{−1/2}‖₁² + r²E(f)).
inline double nash_ratio(const Generator& g, const Vec& vr, const Vec& f, double r) {
    const double X = f.cwiseAbs2().dot(g.mu);
    const double B = std::pow(weighted_l1(g.mu, f, vr.cwiseSqrt().cwiseInverse()), 2);
    const double den = B + r * r * g.energy(f);
    return den > 0.0 ? X / den : std::numeric_limits<double>::quiet_NaN();
}

/// Largest c with ‖f‖₂² log(c‖f‖₂²/‖f v_r^{−1/2}‖₁²) ≤ r²E(f).
inline double log_nash_bound(const Generator& g, const Vec& vr, const Vec& f, double r) {
    const double X = f.cwiseAbs2().dot(g.mu);
    const double B = std::pow(weighted_l1(g.mu, f, vr.cwiseSqrt().cwiseInverse()), 2);
    if (!(X > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return B / X * std::exp(r * r * g.energy(f) / X);
}

/// ‖f‖₂² / (‖f‖₁²/inf_{supp f} v_r + r²E(f)).
inline double kigami_ratio(const Generator& g, const Vec& vr, const Vec& f, double r) {
    double vmin = kInf;
    for (Index y = 0; y < f.size(); ++y)
        if (f(y) != 0.0) vmin = std::min(vmin, vr(y));
    const double X = f.cwiseAbs2().dot(g.mu);
    const double Y = f.cwiseAbs().dot(g.mu);
    const double den = Y * Y / vmin + r * r * g.energy(f);
    return den > 0.0 ? X / den : std::numeric_limits<double>::quiet_NaN();
}

/// ‖f‖₂^{2(1+α)} v_r(x)^α / (‖f‖₁^{2α}(‖f‖₂² + r²E(f))); the homogeneous form drops ‖f‖₂².
inline double local_nash_ratio(const Generator& g, double vrx, const Vec& f, double r, double alpha,
                               bool homogeneous) {
    const double X = f.cwiseAbs2().dot(g.mu);
    const double Y = f.cwiseAbs().dot(g.mu);
    const double bracket = (homogeneous ? 0.0 : X) + r * r * g.energy(f);
    if (!(X > 0.0) || !(bracket > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    // logs keep X^{1+α} from overflowing on large balls
    return std::exp((1.0 + alpha) * std::log(X) + alpha * std::log(vrx) - 2.0 * alpha * std::log(Y) -
                    std::log(bracket));
}

/// ‖f‖_q² v_r(x)^{1−2/q} / (‖f‖₂² + r²E(f)).
inline double ls_ratio(const Generator& g, double vrx, const Vec& f, double r, double q) {
    const double X = f.cwiseAbs2().dot(g.mu);
    const double den = X + r * r * g.energy(f);
    if (!(den > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double e = std::isinf(q) ? 1.0 : 1.0 - 2.0 / q;
    return std::pow(lp_norm(g.mu, f, q), 2) * std::pow(vrx, e) / den;
}

/// (inf_{supp f} v_r^{1−2/q}) ‖f‖_q² / (‖f‖₂² + r²E(f)).
inline double kgn_ratio(const Generator& g, const Vec& vr, const Vec& f, double r, double q) {
    double vmin = kInf;
    for (Index y = 0; y < f.size(); ++y)
        if (f(y) != 0.0) vmin = std::min(vmin, vr(y));
    return ls_ratio(g, vmin, f, r, q);
}

namespace detail {

inline void check_support(const Generator& g, const DictMember& m) {
    for (Index y = 0; y < m.f.size(); ++y)
        if (m.f(y) != 0.0 && !(g.dist(m.x, y) < m.r))
            throw InputError("dictionary member '" + m.kind + "' at " + std::to_string(m.x) +
                             " is not supported in its ball");
}

struct Extremum {
    bool maximize = true;
    double value = std::numeric_limits<double>::quiet_NaN();
    Witness w;
    std::size_t evaluated = 0, skipped = 0;

    void offer(double v, const DictMember& m, double r) {
        if (std::isnan(v)) {
            ++skipped;
            return;
        }
        ++evaluated;
        if (std::isnan(value) || (maximize ? v > value : v < value)) {
            value = v;
            w = Witness{m.kind, m.x, r, 0.0, m.f, {}};
        }
    }

    ConstantEstimate finish(std::string tag, NormMode mode, std::string grid) const {
        if (evaluated == 0) throw PreconditionError(tag + ": every dictionary member was degenerate");
        ConstantEstimate c;
        c.tag = std::move(tag);
        c.value = value;
        c.mode = mode;
        c.witness = w;
        c.grid = std::move(grid);
        c.evaluated = evaluated;
        c.skipped = skipped;
        return c;
    }
};

template <class Ratio>
ConstantEstimate global_estimate(const Generator& g, const VolumeGauge& v, const std::vector<double>& r_grid,
                                 const TestDictionary& dict, bool maximize, Ratio ratio, std::string tag,
                                 NormMode mode) {
    if (dict.members.empty()) throw InputError(tag + ": empty dictionary");
    if (r_grid.empty()) throw InputError(tag + ": empty r grid");
    Extremum e;
    e.maximize = maximize;
    for (double r : r_grid) {
        const Vec vr = g.gauge_at(v, r);
        for (const DictMember& m : dict.members) e.offer(ratio(vr, m.f, r), m, r);
    }
    ConstantEstimate c = e.finish(std::move(tag), mode, grid_descriptor("r", r_grid));
    for (double r : r_grid) {
        const Vec vr = g.gauge_at(v, r);
        double best = std::numeric_limits<double>::quiet_NaN();
        for (const DictMember& m : dict.members) {
            const double val = ratio(vr, m.f, r);
            if (std::isnan(val)) continue;
            if (std::isnan(best) || (maximize ? val > best : val < best)) best = val;
        }
        c.profile.emplace_back(r, best);
    }
    return c;
}

} // namespace detail

/// Dictionary lower bound for the constant of ‖f‖₂² ≤ C(‖f v_r^{−1/2}‖₁² + r²E(f)).
inline ConstantEstimate nash_constant(const Generator& g, const VolumeGauge& v, const std::vector<double>& r_grid,
                                      const TestDictionary& dict) {
    return detail::global_estimate(
        g, v, r_grid, dict, true, [&](const Vec& vr, const Vec& f, double r) { return nash_ratio(g, vr, f, r); },
        "N^v", NormMode::lower);
}

/// Upper bound on the best c of the log-Nash inequality.
inline ConstantEstimate log_nash_constant(const Generator& g, const VolumeGauge& v, const std::vector<double>& r_grid,
                                          const TestDictionary& dict) {
    return detail::global_estimate(
        g, v, r_grid, dict, false, [&](const Vec& vr, const Vec& f, double r) { return log_nash_bound(g, vr, f, r); },
        "logN^v", NormMode::upper);
}

inline ConstantEstimate kigami_nash_constant(const Generator& g, const VolumeGauge& v,
                                             const std::vector<double>& r_grid, const TestDictionary& dict) {
    return detail::global_estimate(
        g, v, r_grid, dict, true, [&](const Vec& vr, const Vec& f, double r) { return kigami_ratio(g, vr, f, r); },
        "KN^v", NormMode::lower);
}

/// Nash constant implied by a log-Nash constant c: 1/min(c/2, log 2).
inline double nash_from_log_nash(double c) { return 1.0 / std::min(c / 2.0, std::log(2.0)); }

/// Localized Nash constant over members at their own balls; `homogeneous` drops ‖f‖₂².
inline ConstantEstimate local_nash_constant(const Generator& g, const VolumeGauge& v, double alpha,
                                            const TestDictionary& dict, bool homogeneous = false) {
    if (!(alpha > 0.0)) throw InputError("local_nash_constant: alpha must be > 0");
    if (dict.members.empty()) throw InputError("local_nash_constant: empty dictionary");
    detail::Extremum e;
    std::vector<double> radii;
    for (const DictMember& m : dict.members) {
        detail::check_support(g, m);
        e.offer(local_nash_ratio(g, v(g.support[static_cast<std::size_t>(m.x)], m.r), m.f, m.r, alpha, homogeneous),
                m, m.r);
        if (std::find(radii.begin(), radii.end(), m.r) == radii.end()) radii.push_back(m.r);
    }
    std::sort(radii.begin(), radii.end());
    const std::string tag = std::string(homogeneous ? "HLN^v" : "LN^v") + " alpha=" + shortest(alpha);
    ConstantEstimate c = e.finish(tag, NormMode::lower, grid_descriptor("ball_r", radii));
    for (double r : radii) {
        double best = std::numeric_limits<double>::quiet_NaN();
        for (const DictMember& m : dict.members) {
            if (m.r != r) continue;
            const double val =
                local_nash_ratio(g, v(g.support[static_cast<std::size_t>(m.x)], m.r), m.f, m.r, alpha, homogeneous);
            if (!std::isnan(val) && (std::isnan(best) || val > best)) best = val;
        }
        c.profile.emplace_back(r, best);
    }
    return c;
}

struct KLAssembly {
    double kappa = 0.0;
    double alpha = 0.0;      ///< 2/κ
    double C_KN = 0.0;
    double C_D2 = 0.0;       ///< sup over balls of v_r(x)/v_r(y), y ∈ B(x,r)
    double C_upper = 0.0;    ///< envelope constant of the doubling profile
    double C_assembled = 0.0;
    double s_star_ratio = 0.0;  ///< optimal s/r for a unit-normalized witness, for reporting
    ConstantEstimate direct;    ///< dictionary LN value at α = 2/κ
};

/// Local Nash constant at α = 2/κ assembled from a Kigami–Nash constant by the
/// optimization over the auxiliary radius s, next to the direct dictionary value.
inline KLAssembly kl_local_nash(const Generator& g, const VolumeGauge& v, const DoublingProfile& P,
                                const ConstantEstimate& kn, const TestDictionary& local_dict) {
    if (!(P.kappa > 0.0)) throw PreconditionError("kl_local_nash: doubling exponent must be > 0");
    KLAssembly out;
    out.kappa = P.kappa;
    out.alpha = 2.0 / P.kappa;
    out.C_KN = kn.value;
    out.C_upper = P.C_upper;
    out.C_D2 = 1.0;
    for (const DictMember& m : local_dict.members) {
        const double vx = v(g.support[static_cast<std::size_t>(m.x)], m.r);
        for (Index y : ball_vars(g, m.x, m.r))
            out.C_D2 = std::max(out.C_D2, vx / v(g.support[static_cast<std::size_t>(y)], m.r));
    }
    const double k = out.kappa, a = out.alpha;
    // min_s a s^{−κ} + b s² = (1+2/κ) b (κa/2b)^{2/(κ+2)}, raised to (κ+2)/κ
    out.C_assembled = std::pow(1.0 + 2.0 / k, 1.0 + a) * std::pow(k / 2.0, a) * std::pow(out.C_KN, 1.0 + a) *
                      std::pow(out.C_D2 * out.C_upper, a);
    out.s_star_ratio = std::pow(k / 2.0 * out.C_D2 * out.C_upper, 1.0 / (k + 2.0));
    out.direct = local_nash_constant(g, v, a, local_dict);
    return out;
}

/// sup over the t grid of |p_t(x,y)|·√(v(x,√t)v(y,√t)).
inline ConstantEstimate due_constant(const SpectralDecomposition& sd, const VolumeGauge& v,
                                     const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw InputError("due_constant: empty t grid");
    ConstantEstimate c;
    c.tag = "DUE^v";
    c.mode = NormMode::exact;
    c.grid = grid_descriptor("t", t_grid);
    c.value = 0.0;
    for (double t : t_grid) {
        if (!(t > 0.0)) throw InputError("due_constant: t must be > 0");
        const KernelOperator W = weighted_heat_kernel(sd, v, 1.0, kInf, 0.5, t);
        Index ax = 0, ay = 0;
        const double val = W.K.cwiseAbs().maxCoeff(&ax, &ay);
        c.profile.emplace_back(t, val);
        ++c.evaluated;
        if (val > c.value || c.witness.kind.empty()) {
            c.value = val;
            c.witness = Witness{"kernel pair", ax, std::sqrt(t), t, {}, {ay}};
        }
    }
    return c;
}

/// max / min of the per-t values in the profile of a constant.
inline double profile_spread(const ConstantEstimate& c) {
    double lo = kInf, hi = 0.0;
    for (const auto& [s, val] : c.profile) {
        lo = std::min(lo, val);
        hi = std::max(hi, val);
    }
    return hi / lo;
}

struct GNResult {
    ConstantEstimate resolvent;   ///< sup_r ‖v_r^{1/2−1/q}(I+r²L)^{−1/2}‖²_{2→q}
    ConstantEstimate semigroup;   ///< sup_r ‖v_r^{1/2−1/q}e^{−r²L}‖²_{2→q}
    double resolvent_norm = 0.0;  ///< unsquared sup norms
    double resolvent_norm_lower = 0.0;
    double semigroup_norm = 0.0;
};

/// Gagliardo–Nirenberg constant as a weighted resolvent norm, with the semigroup-side functional.
inline GNResult gn_constant(const SpectralDecomposition& sd, const VolumeGauge& v, double q,
                            const std::vector<double>& r_grid, const OpnormOptions& opt = {}) {
    if (!(q > 2.0)) throw InputError("gn_constant: q <= 2 is the trivial case");
    if (r_grid.empty()) throw InputError("gn_constant: empty r grid");
    const Generator& g = sd.generator();
    const double e = std::isinf(q) ? 0.5 : 0.5 - 1.0 / q;
    const std::string qs = std::isinf(q) ? "inf" : shortest(q);
    GNResult out;
    out.resolvent.tag = "GN_q^v q=" + qs;
    out.semigroup.tag = "vE_2q q=" + qs;
    out.resolvent.grid = out.semigroup.grid = grid_descriptor("r", r_grid);
    out.resolvent.mode = out.semigroup.mode = std::isinf(q) ? NormMode::exact : NormMode::upper;
    const Vec one = Vec::Ones(g.size());
    for (double r : r_grid) {
        if (!(r > 0.0)) throw InputError("gn_constant: r must be > 0");
        const Vec w = g.gauge_at(v, r).array().pow(e).matrix();
        const NormBounds a = opnorm(weighted_kernel(resolvent_power(sd, r * r, 1.0), w, one), 2.0, q, opt);
        const NormBounds b = opnorm(weighted_kernel(heat_operator(sd, r * r), w, one), 2.0, q, opt);
        out.resolvent.profile.emplace_back(r, a.value() * a.value());
        out.semigroup.profile.emplace_back(r, b.value() * b.value());
        if (a.value() > out.resolvent_norm) {
            out.resolvent_norm = a.value();
            out.resolvent.witness = Witness{"row", a.upper.arg_row, r, 0.0, a.upper.witness, {}};
        }
        out.resolvent_norm_lower = std::max(out.resolvent_norm_lower, a.lower.value);
        if (b.value() > out.semigroup_norm) {
            out.semigroup_norm = b.value();
            out.semigroup.witness = Witness{"row", b.upper.arg_row, r, 0.0, b.upper.witness, {}};
        }
        out.resolvent.evaluated++;
        out.semigroup.evaluated++;
    }
    out.resolvent.value = out.resolvent_norm * out.resolvent_norm;
    out.semigroup.value = out.semigroup_norm * out.semigroup_norm;
    return out;
}

/// Dictionary lower bound for the Kigami form of the Gagliardo–Nirenberg inequality.
inline ConstantEstimate kgn_constant(const Generator& g, const VolumeGauge& v, double q,
                                     const std::vector<double>& r_grid, const TestDictionary& dict) {
    if (!(q > 2.0)) throw InputError("kgn_constant: q must be > 2");
    return detail::global_estimate(
        g, v, r_grid, dict, true, [&](const Vec& vr, const Vec& f, double r) { return kgn_ratio(g, vr, f, r, q); },
        "KGN_q^v q=" + (std::isinf(q) ? std::string("inf") : shortest(q)), NormMode::lower);
}

/// Dictionary lower bound for the local Sobolev constant over ball-supported members.
inline ConstantEstimate ls_constant(const Generator& g, const VolumeGauge& v, double q, const TestDictionary& dict) {
    if (!(q > 2.0)) throw InputError("ls_constant: q must be > 2");
    if (dict.members.empty()) throw InputError("ls_constant: empty dictionary");
    detail::Extremum e;
    std::vector<double> radii;
    for (const DictMember& m : dict.members) {
        detail::check_support(g, m);
        e.offer(ls_ratio(g, v(g.support[static_cast<std::size_t>(m.x)], m.r), m.f, m.r, q), m, m.r);
        if (std::find(radii.begin(), radii.end(), m.r) == radii.end()) radii.push_back(m.r);
    }
    std::sort(radii.begin(), radii.end());
    return e.finish("LS_q^v q=" + (std::isinf(q) ? std::string("inf") : shortest(q)), NormMode::lower,
                    grid_descriptor("ball_r", radii));
}

} // namespace heatlab
