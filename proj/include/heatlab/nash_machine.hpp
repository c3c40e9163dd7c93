#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "heatlab/functional.hpp"
#include "heatlab/rate_function.hpp"

namespace heatlab {

/// ṽ(r) = (2/r)∫_{r/2}^r v(s) ds at the samples of v.
inline RateFunction smooth_gauge(const RateFunction& v) {
    std::vector<double> y;
    for (double r : v.x()) {
        auto f = [&](double s) { return v(s); };
        y.push_back(2.0 / r * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, r / 2.0, r, 8, 1e-13));
    }
    return RateFunction(v.x(), std::move(y), "vtilde");
}

/// θ₁(τ) = τ/(2C[v⁻¹(2C/τ)]²) at τ = 2C/v(r) for every sample r of v.
inline RateFunction theta_from_nash(double C, const RateFunction& v, bool smoothed = false) {
    if (!(C > 0.0)) throw InputError("theta_from_nash: C must be > 0");
    if (!v.increasing()) throw InputError("theta_from_nash: v must be one-to-one increasing on its samples");
    const RateFunction u = smoothed ? smooth_gauge(v) : v;
    if (!u.increasing()) throw InputError("theta_from_nash: smoothed v is not increasing");
    std::vector<double> tau, th;
    for (double val : u.y()) {
        const double t = 2.0 * C / val;
        const double r = u.inverse(2.0 * C / t);
        tau.push_back(t);
        th.push_back(t / (2.0 * C * r * r));
    }
    return RateFunction(std::move(tau), std::move(th), "theta1");
}

/// Largest σ with U'(s) ≥ σU'(r) for sampled r ≤ s ≤ 2r, U = log v.
inline double star_sigma(const RateFunction& v) {
    double sigma = kInf;
    for (double r : v.x())
        for (double s : v.x()) {
            if (s < r || s > 2.0 * r) continue;
            const double ur = v.log_slope(r) / r, us = v.log_slope(s) / s;
            if (!(ur > 0.0)) throw InputError("star_sigma: v must be strictly increasing");
            sigma = std::min(sigma, us / ur);
        }
    return sigma;
}

struct LogNashTheta {
    RateFunction theta2;        ///< τ sup_r log(c v(r) τ)/r², maximized over r
    RateFunction theta2_tilde;  ///< c̃ τ² v'(R)/R with R = v⁻¹(1/τ)
    std::vector<double> argmax_r;
    double sigma = 0.0;
    double c_tilde = 0.0;      ///< constant used for θ̃₂
    double c_tilde_fit = 0.0;  ///< largest constant with θ₂ ≥ c̃·(shape) on the samples
    bool dominates = false;    ///< θ₂ ≥ θ̃₂ on every sample
};

/// θ₂ by maximization over r and its lower bound θ̃₂ under (*_v).
///
/// Taking r = 2R, log(c v(2R)τ) ≥ log c + σRU'(R), so θ₂ ≥ θ̃₂ with
/// c̃ = (σ/4)(1 + min(0, log c)/a), a = σ inf_R RU'(R); c̃ is also fitted and recorded.
inline LogNashTheta theta_from_lognash(double c, const RateFunction& v, double sigma) {
    if (!(c > 0.0)) throw InputError("theta_from_lognash: c must be > 0");
    if (!(sigma > 0.0 && sigma <= 1.0)) throw InputError("theta_from_lognash: sigma must lie in (0, 1]");
    if (!v.increasing()) throw InputError("theta_from_lognash: v must be increasing");
    if (star_sigma(v) < sigma * (1 - 1e-9))
        throw PreconditionError("theta_from_lognash: (*_v) fails on the samples with sigma = " + shortest(sigma));
    const double lo = v.x_min(), hi = v.x_max();
    std::vector<double> Rs;
    for (double r : v.x())
        if (r >= 4.0 * lo && r <= hi / 4.0) Rs.push_back(r);
    if (Rs.size() < 2) throw InputError("theta_from_lognash: v needs samples spanning more than 16x");
    LogNashTheta out;
    out.sigma = sigma;
    double amin = kInf;
    for (double R : Rs) amin = std::min(amin, sigma * v.log_slope(R));
    out.c_tilde = sigma / 4.0 * (1.0 + std::min(0.0, std::log(c)) / amin);
    if (!(out.c_tilde > 0.0))
        throw PreconditionError("theta_from_lognash: c is too small for the lower bound at this sigma");
    std::vector<double> tau, th2, tht, shape;
    for (double R : Rs) {
        const double t = 1.0 / v(R);
        auto obj = [&](double r) { return (std::log(c * t) + std::log(v(r))) / (r * r); };
        std::vector<double> cand(v.x());
        for (int k = 0; k <= 64; ++k) cand.push_back(R * (1.0 + k / 64.0));
        std::sort(cand.begin(), cand.end());
        std::size_t best = 0;
        for (std::size_t i = 1; i < cand.size(); ++i)
            if (obj(cand[i]) > obj(cand[best])) best = i;
        if (best == 0 || best + 1 == cand.size())
            throw PreconditionError("theta_from_lognash: the supremum over r has to be finite; it is not attained "
                                    "inside the sampled range");
        const auto m = boost::math::tools::brent_find_minima([&](double u) { return -obj(std::exp(u)); },
                                                             std::log(cand[best - 1]), std::log(cand[best + 1]), 50);
        const double val = std::max(obj(cand[best]), -m.second);
        out.argmax_r.push_back(-m.second >= obj(cand[best]) ? std::exp(m.first) : cand[best]);
        tau.push_back(t);
        th2.push_back(t * val);
        shape.push_back(t * t * v.derivative(R) / R);
        tht.push_back(out.c_tilde * shape.back());
    }
    out.c_tilde_fit = kInf;
    out.dominates = true;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (!(th2[i] > 0.0))
            throw PreconditionError("theta_from_lognash: theta2 is not positive at tau = " + shortest(tau[i]));
        out.c_tilde_fit = std::min(out.c_tilde_fit, th2[i] / shape[i]);
        if (th2[i] < tht[i] * (1 - 1e-12)) out.dominates = false;
    }
    out.theta2 = RateFunction(tau, th2, "theta2");
    out.theta2_tilde = RateFunction(tau, tht, "theta2_tilde");
    return out;
}

namespace detail {

// ∫ dτ/θ over [a, b] inside the sampled range, in the variable log τ
inline double theta_segment_integral(const RateFunction& th, double a, double b) {
    if (!(b > a)) return 0.0;
    auto f = [&](double u) {
        const double t = std::exp(u);
        return t / th(t);
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, std::log(a), std::log(b), 8, 1e-13);
}

// ∫_a^b dτ/(c τ^p)
inline double power_integral(const PowerTail& t, double a, double b) {
    const double q = 1.0 - t.exponent;
    if (std::abs(q) < 1e-14) return std::log(b / a) / t.coeff;
    return (std::pow(b, q) - std::pow(a, q)) / (q * t.coeff);
}

} // namespace detail

/// Minimal tail exponent for the integral equation; fitted exponents closer to 1 are rejected.
inline constexpr double kTailMargin = 0.05;

/// ∫_M^∞ dτ/θ(τ) using the fitted tails outside the samples.
inline double theta_tail_integral(const RateFunction& th, double M) {
    if (!(M > 0.0)) throw InputError("theta_tail_integral: M must be > 0");
    const PowerTail& hi = th.high_tail();
    if (!(hi.exponent > 1.0 + kTailMargin))
        throw PreconditionError("m_from_theta: condition int^{+inf} dtau/theta(tau) < +inf fails (tail exponent " +
                                shortest(hi.exponent) + ")");
    const auto& xs = th.x();
    const double top = xs.back();
    double I = std::pow(std::max(M, top), 1.0 - hi.exponent) / ((hi.exponent - 1.0) * hi.coeff);
    if (M < top) {
        for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
            const double a = std::max(M, xs[k]), b = xs[k + 1];
            if (b > a) I += detail::theta_segment_integral(th, a, b);
        }
        if (M < xs.front()) I += detail::power_integral(th.low_tail(), M, xs.front());
    }
    return I;
}

/// m(t) solving ∫_{m(t)}^∞ dτ/θ(τ) = 2t at each t of the grid.
inline RateFunction m_from_theta(const RateFunction& th, const std::vector<double>& t_grid) {
    if (t_grid.size() < 2) throw InputError("m_from_theta: need >= 2 times");
    theta_tail_integral(th, th.x_max());  // tail condition
    std::vector<double> m;
    for (double t : t_grid) {
        if (!(t > 0.0)) throw InputError("m_from_theta: t must be > 0");
        auto fn = [&](double u) { return std::log(theta_tail_integral(th, std::exp(u))) - std::log(2.0 * t); };
        // bracket in log M
        double a = std::log(th.x_min()), b = std::log(th.x_max());
        int guard = 0;
        while (fn(a) < 0.0) {
            a -= 2.0;
            if (++guard > 400)
                throw PreconditionError("m_from_theta: 2t exceeds the total integral of 1/theta at t = " + shortest(t));
        }
        guard = 0;
        while (fn(b) > 0.0) {
            b += 2.0;
            if (++guard > 400) throw PreconditionError("m_from_theta: no bracket at t = " + shortest(t));
        }
        std::uintmax_t it = 300;
        const auto r =
            boost::math::tools::toms748_solve(fn, a, b, fn(a), fn(b), boost::math::tools::eps_tolerance<double>(50), it);
        m.push_back(std::exp(0.5 * (r.first + r.second)));
    }
    return RateFunction(t_grid, std::move(m), "m");
}

/// w(r) = 1/(A² m(r²/2)) on the r grid.
inline RateFunction w_from_m(double A, const RateFunction& m, const std::vector<double>& r_grid) {
    if (!(A >= 1.0)) throw InputError("w_from_m: A = sup_t ||e^{-tL}||_{1->1} is >= 1");
    std::vector<double> w;
    for (double r : r_grid) w.push_back(1.0 / (A * A * m(r * r / 2.0)));
    return RateFunction(r_grid, std::move(w), "w");
}

struct WVComparison {
    double C = 0.0;   ///< min over the grid of w(r)/v(c r)
    double c = 1.0;   ///< radius scaling; 1 for the doubling form
    bool success() const { return C > 0.0 && std::isfinite(C); }
};

/// Largest C with w(r) ≥ C v(r) on the grid, or with w(r) ≥ C v(cr) for the best c ∈ [1/4, 1].
inline WVComparison compare_w_v(const RateFunction& w, const RateFunction& v, const std::vector<double>& r_grid,
                                bool scaled = false) {
    if (r_grid.empty()) throw InputError("compare_w_v: empty grid");
    auto C_at = [&](double c) {
        double C = kInf;
        for (double r : r_grid) C = std::min(C, w(r) / v(c * r));
        return C;
    };
    WVComparison out;
    out.C = C_at(1.0);
    if (scaled) {
        for (int k = 0; k <= 40; ++k) {
            const double c = std::pow(0.25, 1.0 - k / 40.0);
            const double C = C_at(c);
            if (C > out.C) {
                out.C = C;
                out.c = c;
            }
        }
    }
    return out;
}

/// α = 1/(1/p − 1/q).
inline double extrapolation_alpha(double p, double q) {
    const double d = 1.0 / p - (std::isinf(q) ? 0.0 : 1.0 / q);
    if (!(p >= 1.0) || !(d > 0.0)) throw InputError("extrapolation_alpha: need 1 <= p < q");
    return 1.0 / d;
}

struct Extrapolation {
    double alpha = 0.0;
    double A = 0.0;                 ///< sup_t ‖e^{−tL}‖_{1→1}
    double doubling = 0.0;          ///< max w(2t)/w(t) on the grid
    std::vector<double> t, measured, predicted;  ///< measured ‖e^{−tL}‖_{1→∞} and w(t)^{−α}
    double C = 0.0;                 ///< smallest C with measured ≤ C·predicted on the grid
    double spread = 0.0;            ///< max/min of measured/predicted
    bool stable = false;            ///< spread ≤ 4
};

/// Predicted 1→∞ decay w(t)^{−α} from a measured p→q profile ‖e^{−tL}‖_{p→q} ≤ 1/w(t).
inline std::vector<double> extrapolate_exponent(const RateFunction& w, double p, double q,
                                                const std::vector<double>& t_grid) {
    const double a = extrapolation_alpha(p, q);
    std::vector<double> out;
    for (double t : t_grid) out.push_back(std::pow(w(t), -a));
    return out;
}

/// Checks the extrapolated 1→∞ bound against exact norms.
inline Extrapolation verify_extrapolation(const SpectralDecomposition& sd, const RateFunction& w, double p, double q,
                                          const std::vector<double>& t_grid, double max_doubling = 65536.0) {
    Extrapolation out;
    out.alpha = extrapolation_alpha(p, q);
    for (std::size_t i = 1; i < w.y().size(); ++i)
        if (w.y()[i] < w.y()[i - 1]) throw PreconditionError("verify_extrapolation: w must be nondecreasing");
    for (double t : t_grid) out.doubling = std::max(out.doubling, w(2.0 * t) / w(t));
    if (!(out.doubling <= max_doubling))
        throw PreconditionError("verify_extrapolation: w is not doubling on the grid (w(2t)/w(t) up to " +
                                shortest(out.doubling) + ")");
    for (double t : t_grid) out.A = std::max(out.A, norm_1_to_q(heat_operator(sd, t), 1.0).value);
    out.t = t_grid;
    out.predicted = extrapolate_exponent(w, p, q, t_grid);
    double lo = kInf;
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        out.measured.push_back(norm_p_to_inf(heat_operator(sd, t_grid[i]), 1.0).value);
        const double ratio = out.measured.back() / out.predicted[i];
        out.C = std::max(out.C, ratio);
        lo = std::min(lo, ratio);
    }
    out.spread = out.C / lo;
    out.stable = std::isfinite(out.C) && out.spread <= 4.0;
    return out;
}

struct NashLogNashWitness {
    std::string kind;
    double B = 0.0;       ///< E(f)/‖f‖₂²
    double r0 = 0.0;      ///< inf{r : r²B ≥ A(r,f)}; 0 when B = 0
    double A_r0 = 0.0;
    double worst = kInf;  ///< min over the grid of A(r,f)e^{r²B(f)}
    bool holds = false;
};

struct NashLogNashReport {
    double c = 0.0;        ///< inf of A(r,f) + r²B(f) over the witnesses and the radii the proof uses
    double C_D = 0.0;      ///< max v(2r)/v(r) over those radii
    double kappa = 0.0;
    double C_kappa = 0.0;  ///< v(r)/v(s) ≤ C_kappa (r/s)^κ for r ≥ s among those radii
    double c_prime = 0.0;  ///< c/(4C_D + 1)
    double b = 0.0;        ///< inf_{x≥1} x^{−κ} e^{c'x²}
    double assembled = 0.0;  ///< min(c', c'b/C_kappa): r ≤ r₀ and r ≥ r₀ branches of the proof
    std::vector<NashLogNashWitness> witnesses;
    bool all_hold() const {
        for (const auto& w : witnesses)
            if (!w.holds) return false;
        return !witnesses.empty();
    }
};

/// inf_{x≥1} x^{−κ} e^{c x²}.
inline double nash_b_constant(double kappa, double c) {
    const double x2 = kappa / (2.0 * c);
    if (x2 <= 1.0) return std::exp(c);
    return std::pow(x2, -kappa / 2.0) * std::exp(kappa / 2.0);
}

/// Nash ⇒ log-Nash for a uniform doubling gauge, on dictionary witnesses.
///
/// A(r,f) = ‖f v_r^{−1/2}‖₁²/‖f‖₂², B(f) = E(f)/‖f‖₂²; the constants c, C_D and (C_kappa, κ) are
/// measured on the radii the argument visits (the grid, r₀/2, r₀, 2r₀), so every step is exact there.
inline NashLogNashReport nash_equiv_lognash_check(const Generator& g, const VolumeGauge& v,
                                                  const std::vector<double>& r_grid, const TestDictionary& dict) {
    if (dict.members.empty() || r_grid.empty()) throw InputError("nash_equiv_lognash_check: empty inputs");
    for (double r : r_grid)
        for (Index y = 0; y < g.size(); ++y) {
            const double a = v(g.support[0], r), b = v(g.support[static_cast<std::size_t>(y)], r);
            if (std::abs(a - b) > 1e-12 * std::max(a, b))
                throw InputError("nash_equiv_lognash_check: the gauge must not depend on x");
        }
    const Index x0 = g.support[0];
    auto vr = [&](double r) { return v(x0, r); };
    struct Pre {
        double X, Y2, B;
    };
    std::vector<Pre> pre;
    for (const DictMember& m : dict.members) {
        const double X = m.f.cwiseAbs2().dot(g.mu);
        const double Y = m.f.cwiseAbs().dot(g.mu);
        pre.push_back({X, Y * Y, g.energy(m.f) / X});
    }
    auto A = [&](const Pre& p, double r) { return p.Y2 / (vr(r) * p.X); };
    NashLogNashReport rep;
    std::vector<double> radii = r_grid;
    std::vector<double> r0s(pre.size(), 0.0);
    for (std::size_t i = 0; i < pre.size(); ++i) {
        const Pre& p = pre[i];
        if (!(p.B > 0.0)) continue;
        // r²B − A(r,f) is increasing; bracket then bisect
        double lo = r_grid.front(), hi = r_grid.back();
        while (lo * lo * p.B >= A(p, lo) && lo > 1e-12) lo /= 2.0;
        while (hi * hi * p.B < A(p, hi)) hi *= 2.0;
        for (int k = 0; k < 200 && hi - lo > 1e-15 * hi; ++k) {
            const double mid = 0.5 * (lo + hi);
            (mid * mid * p.B >= A(p, mid) ? hi : lo) = mid;
        }
        r0s[i] = hi;
        for (double r : {hi / 2.0, hi, 2.0 * hi}) radii.push_back(r);
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
    rep.c = kInf;
    for (std::size_t i = 0; i < pre.size(); ++i) {
        for (double r : r_grid) rep.c = std::min(rep.c, A(pre[i], r) + r * r * pre[i].B);
        if (r0s[i] > 0.0)
            for (double r : {r0s[i] / 2.0, r0s[i], 2.0 * r0s[i]}) rep.c = std::min(rep.c, A(pre[i], r) + r * r * pre[i].B);
    }
    std::vector<double> lr, lv;
    for (double r : radii) {
        rep.C_D = std::max(rep.C_D, vr(2.0 * r) / vr(r));
        lr.push_back(std::log(r));
        lv.push_back(std::log(vr(r)));
    }
    rep.kappa = std::max(0.0, detail::ls_slope(lr, lv));
    rep.C_kappa = 1.0;
    for (std::size_t i = 0; i < radii.size(); ++i)
        for (std::size_t j = 0; j <= i; ++j)
            rep.C_kappa = std::max(rep.C_kappa, vr(radii[i]) / vr(radii[j]) * std::pow(radii[j] / radii[i], rep.kappa));
    rep.c_prime = rep.c / (4.0 * rep.C_D + 1.0);
    rep.b = nash_b_constant(std::max(rep.kappa, 1e-300), rep.c_prime);
    rep.assembled = std::min(rep.c_prime, rep.c_prime * rep.b / rep.C_kappa);
    for (std::size_t i = 0; i < pre.size(); ++i) {
        NashLogNashWitness w;
        w.kind = dict.members[i].kind;
        w.B = pre[i].B;
        w.r0 = r0s[i];
        w.A_r0 = w.r0 > 0.0 ? A(pre[i], w.r0) : 0.0;
        for (double r : r_grid) w.worst = std::min(w.worst, A(pre[i], r) * std::exp(r * r * pre[i].B));
        // with B = 0 the Nash inequality bounds A alone
        const double target = pre[i].B > 0.0 ? rep.assembled : rep.c;
        w.holds = w.worst >= target * (1 - 1e-12);
        rep.witnesses.push_back(w);
    }
    return rep;
}

} // namespace heatlab
