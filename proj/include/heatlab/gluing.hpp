#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "heatlab/doubling.hpp"
#include "heatlab/functional.hpp"

namespace heatlab {

/// C_Γ = max_a Σ_b w_ab len_ab² / mu(a): bounds Σ_b w_ab (ρ(a)−ρ(b))² ≤ C_Γ mu(a)/ε² for ε⁻¹-Lipschitz ρ.
inline double graph_leibniz_constant(const MetricMeasureSpace& s) {
    Vec acc = Vec::Zero(s.size());
    for (const Edge& e : s.edges()) {
        acc(e.a) += e.w * e.len * e.len;
        acc(e.b) += e.w * e.len * e.len;
    }
    return s.size() ? acc.cwiseQuotient(s.mu()).maxCoeff() : 0.0;
}

/// Certified multiplier m in E(gρ) ≤ m·((2/ε²)‖gχ_B‖₂² + 2E_B(g)).
///
/// Per edge, (gρ)(a) − (gρ)(b) = ½(ρ(a)+ρ(b))Δg + ½(g(a)+g(b))Δρ, so
/// E(gρ) ≤ 2E_B(g) + (C_Γ/ε²)‖gχ_B‖₂², and m = max(1, C_Γ/2).
inline double cutoff_multiplier(const MetricMeasureSpace& s) { return std::max(1.0, graph_leibniz_constant(s) / 2.0); }

struct CutoffEnergy {
    double lhs = 0.0;          ///< E(gρ)
    double rhs = 0.0;          ///< (2/ε²)‖gχ_{B(x,r)}‖₂² + 2E_{B(x,r)}(g), ε = r/4
    double multiplier = 0.0;   ///< lhs / rhs, the smallest factor that works on this instance
    double graph_constant = 0.0;  ///< certified m = max(1, C_Γ/2)
    double local_mass = 0.0;   ///< ‖gχ_B‖₂²
    double local_energy = 0.0; ///< energy of g on edges with both endpoints in B(x,r)
};

/// Energy of g on edges with both endpoints in `in`.
inline double local_energy(const MetricMeasureSpace& s, const Vec& g, const std::vector<char>& in) {
    double e = 0.0;
    for (const Edge& ed : s.edges())
        if (in[static_cast<std::size_t>(ed.a)] && in[static_cast<std::size_t>(ed.b)])
            e += ed.w * (g(ed.a) - g(ed.b)) * (g(ed.a) - g(ed.b));
    return e;
}

/// Cutoff energy bound for ρ = ρ_x^{r, r/4}.
///
/// Throws PreconditionError when an edge touching supp ρ leaves B(x, r); r ≥ 4·(max edge
/// length) is sufficient but not necessary for this.
inline CutoffEnergy cutoff_energy_bound(const MetricMeasureSpace& s, const Vec& g, Index x, double r) {
    s.check_dim(g);
    if (!(r > 0.0)) throw InputError("cutoff_energy_bound: r must be > 0");
    const Vec rho = cutoff_function(s, x, r);
    std::vector<char> in(static_cast<std::size_t>(s.size()), 0);
    for (Index y : ball(s, x, r)) in[static_cast<std::size_t>(y)] = 1;
    for (const Edge& e : s.edges())
        if ((rho(e.a) > 0.0 || rho(e.b) > 0.0) && !(in[static_cast<std::size_t>(e.a)] && in[static_cast<std::size_t>(e.b)]))
            throw PreconditionError("cutoff_energy_bound: an edge at the cutoff's support leaves B(x, r); r is too "
                                    "small for the edge lengths");
    CutoffEnergy out;
    const double eps = r / 4.0;
    for (Index y = 0; y < s.size(); ++y)
        if (in[static_cast<std::size_t>(y)]) out.local_mass += g(y) * g(y) * s.mu(y);
    out.local_energy = local_energy(s, g, in);
    out.lhs = dirichlet_energy(s, g.cwiseProduct(rho));
    out.rhs = 2.0 / (eps * eps) * out.local_mass + 2.0 * out.local_energy;
    out.multiplier = out.rhs > 0.0 ? out.lhs / out.rhs : 0.0;
    out.graph_constant = cutoff_multiplier(s);
    return out;
}

struct GluingTrial {
    double norm2 = 0.0;        ///< ‖g‖₂²
    double sum_local2 = 0.0;   ///< Σ‖gρ_i‖₂²
    double sum_l1_sq = 0.0;    ///< Σ‖gρ_i v_r^{−1/2}‖₁²
    double l1_sq = 0.0;        ///< ‖g v_r^{−1/2}‖₁²
    double energy = 0.0;       ///< E(g)
    double instance_ln = 0.0;  ///< max_i local Nash ratio of gρ_i with v_r pointwise
    double global_rhs = 0.0;   ///< C_assembled (‖g v_r^{−1/2}‖₁² + r²E(g))
    bool covering = false;     ///< (a) ‖g‖₂² ≤ Σ‖gρ_i‖₂²
    bool l1_sum = false;       ///< (b) Σ‖gρ_i v^{−1/2}‖₁² ≤ K0²‖g v^{−1/2}‖₁²
    bool l2_sum = false;       ///< (c) Σ‖gρ_i‖₂² ≤ K0‖g‖₂²
    bool global = false;       ///< (d) ‖g‖₂² ≤ assembled bound
};

struct GluingReport {
    double r = 0.0;
    int K0 = 0;
    std::size_t centers = 0;
    double alpha = 1.0;
    double m = 1.0;            ///< cutoff multiplier
    double C_local = 0.0;      ///< local Nash constant used in the assembly
    double epsilon = 0.0;      ///< 1/(2(32m+1)K0); equals 1/(66K0) when m = 1
    double C_assembled = 0.0;  ///< global Nash constant assembled as in the proof
    double C_dictionary = std::numeric_limits<double>::quiet_NaN();  ///< dictionary N^v at this r, if given
    std::vector<GluingTrial> trials;

    bool all_hold() const {
        for (const auto& t : trials)
            if (!(t.covering && t.l1_sum && t.l2_sum && t.global)) return false;
        return std::isfinite(C_assembled);
    }
};

struct GluingOptions {
    int trials = 20;
    double alpha = 1.0;
    std::uint64_t seed = 0;
    double C_local = 0.0;   ///< measured local Nash constant; the instance ratios are folded in by max
};

/// Local-to-global gluing pipeline on random global functions.
///
/// With a local Nash constant C the Young step gives ‖f‖₂² ≤ C^{1/α}ε^{−1/α}‖f v_r^{−1/2}‖₁² + ε(r²E(f) + ‖f‖₂²)
/// for each gρ_i; summing with the three partition inequalities and the cutoff bound and
/// absorbing ‖g‖₂² with ε = 1/(2(32m+1)K0) gives
/// ‖g‖₂² ≤ 2C^{1/α}ε^{−1/α}K0²‖g v_r^{−1/2}‖₁² + 4mεK0 r²E(g).
inline GluingReport local_to_global_check(const MetricMeasureSpace& s, const VolumeGauge& v, double r,
                                          const GluingOptions& opt = {}) {
    if (s.num_components() != 1) throw PreconditionError("local_to_global_check: space must be connected");
    if (!(r > 0.0)) throw InputError("local_to_global_check: r must be > 0");
    const Covering cov = bounded_covering(s, r);
    const Generator g = generator_of(s);
    GluingReport rep;
    rep.r = r;
    rep.K0 = cov.K0;
    rep.centers = cov.centers.size();
    rep.alpha = opt.alpha;
    rep.m = cutoff_multiplier(s);
    const Vec vr = g.gauge_at(v, r);
    const Vec iv = vr.cwiseSqrt().cwiseInverse();
    // the cutoff bound's precondition, once per center
    for (Index x : cov.centers) cutoff_energy_bound(s, Vec::Zero(s.size()), x, r);

    std::vector<Vec> gs;
    for (int k = 0; k < opt.trials; ++k) {
        std::mt19937_64 rng(mix_seed(opt.seed, 0x61ULL, static_cast<std::uint64_t>(k)));
        Vec f(s.size());
        for (Index y = 0; y < s.size(); ++y) f(y) = uniform_pm1(rng);
        gs.push_back(std::move(f));
    }
    double C = opt.C_local;
    rep.trials.resize(gs.size());
    for (std::size_t k = 0; k < gs.size(); ++k) {
        const Vec& f = gs[k];
        GluingTrial& t = rep.trials[k];
        t.norm2 = f.cwiseAbs2().dot(s.mu());
        t.l1_sq = std::pow(weighted_l1(s.mu(), f, iv), 2);
        t.energy = g.energy(f);
        for (std::size_t i = 0; i < cov.centers.size(); ++i) {
            const Vec fi = f.cwiseProduct(cov.cutoffs[i]);
            t.sum_local2 += fi.cwiseAbs2().dot(s.mu());
            t.sum_l1_sq += std::pow(weighted_l1(s.mu(), fi, iv), 2);
            // local Nash ratio with v_r pointwise: X^{1+α}/(‖f v^{−1/2}‖₁^{2α}(X + r²E))
            const double X = fi.cwiseAbs2().dot(s.mu());
            if (X > 0.0) {
                const double B = weighted_l1(s.mu(), fi, iv);
                const double ratio = std::exp((1.0 + opt.alpha) * std::log(X) - 2.0 * opt.alpha * std::log(B) -
                                              std::log(X + r * r * g.energy(fi)));
                t.instance_ln = std::max(t.instance_ln, ratio);
            }
        }
        C = std::max(C, t.instance_ln);
    }
    rep.C_local = C;
    const double K0 = rep.K0;
    rep.epsilon = 1.0 / (2.0 * (32.0 * rep.m + 1.0) * K0);
    const double a = 2.0 * std::pow(C, 1.0 / opt.alpha) * std::pow(rep.epsilon, -1.0 / opt.alpha) * K0 * K0;
    const double b = 4.0 * rep.m * rep.epsilon * K0;
    rep.C_assembled = std::max(a, b);
    const double tol = 1e-12;
    for (GluingTrial& t : rep.trials) {
        t.covering = t.norm2 <= t.sum_local2 * (1 + tol);
        t.l1_sum = t.sum_l1_sq <= K0 * K0 * t.l1_sq * (1 + tol);
        t.l2_sum = t.sum_local2 <= K0 * t.norm2 * (1 + tol);
        t.global_rhs = a * t.l1_sq + b * r * r * t.energy;
        t.global = t.norm2 <= t.global_rhs * (1 + tol);
    }
    return rep;
}

struct HomogenizeReport {
    bool applicable = false;
    std::string reason;
    double alpha = 1.0;
    double C_LN = 0.0;          ///< local Nash constant including the witnesses at radius Ar
    double eps_vV = 0.0;        ///< min v/V over the witness balls
    double C2 = 0.0;            ///< C'' = C_LN·ε^{−α}
    double kappa_prime = 0.0;
    double A_min = kInf;        ///< smallest grid A with C''(v_r/v_{Ar})^α ≤ 1/2 at every witness center
    double A_closed_form = kInf;  ///< (2C'')^{1/(ακ')}
    double worst_prefactor = 0.0; ///< C''(v_r/v_{Ar})^α at A_min
    bool hln_holds = false;     ///< every witness satisfies the homogeneous form with 2C_LN A²
    double hln_worst_ratio = 0.0; ///< max over witnesses of lhs/rhs of that form
};

/// Removes the ‖f‖₂² term of the local Nash inequality by passing to radius Ar.
///
/// Every witness f ⊂ B(x,r) is also a competitor in B(x,Ar), so the constant used is the
/// max of the given one and those ratios; the homogeneous conclusion
/// ‖f‖₂^{2(1+α)} ≤ 2C A²r² v_{Ar}(x)^{−α}‖f‖₁^{2α}E(f) is then checked per witness.
inline HomogenizeReport homogenize_check(const Generator& g, const VolumeGauge& v, const VolumeGauge& V, double alpha,
                                         const TestDictionary& dict, const std::vector<double>& A_grid,
                                         double C_LN, double kappa_prime) {
    if (dict.members.empty()) throw InputError("homogenize_check: empty dictionary");
    if (A_grid.empty()) throw InputError("homogenize_check: empty A grid");
    HomogenizeReport rep;
    rep.alpha = alpha;
    rep.kappa_prime = kappa_prime;
    if (!(kappa_prime > 1e-3)) {
        rep.reason = "reverse doubling exponent is ~0 on the grid (volume saturates)";
        return rep;
    }
    std::vector<double> As = A_grid;
    std::sort(As.begin(), As.end());
    rep.C_LN = C_LN;
    rep.eps_vV = kInf;
    for (const DictMember& m : dict.members) {
        const Index px = g.support[static_cast<std::size_t>(m.x)];
        rep.eps_vV = std::min(rep.eps_vV, v(px, m.r) / V(px, m.r));
        for (double A : As) {
            const double val = local_nash_ratio(g, v(px, A * m.r), m.f, A * m.r, alpha, false);
            if (!std::isnan(val)) rep.C_LN = std::max(rep.C_LN, val);
        }
    }
    rep.C2 = rep.C_LN * std::pow(rep.eps_vV, -alpha);
    rep.A_closed_form = std::pow(2.0 * rep.C2, 1.0 / (alpha * kappa_prime));
    for (double A : As) {
        double worst = 0.0;
        for (const DictMember& m : dict.members) {
            const Index px = g.support[static_cast<std::size_t>(m.x)];
            worst = std::max(worst, rep.C2 * std::pow(v(px, m.r) / v(px, A * m.r), alpha));
        }
        if (worst <= 0.5) {
            rep.A_min = A;
            rep.worst_prefactor = worst;
            break;
        }
    }
    if (!std::isfinite(rep.A_min)) {
        rep.reason = "no A on the grid brings the prefactor below 1/2";
        return rep;
    }
    rep.applicable = true;
    rep.hln_holds = true;
    const double A = rep.A_min;
    for (const DictMember& m : dict.members) {
        const Index px = g.support[static_cast<std::size_t>(m.x)];
        const double X = m.f.cwiseAbs2().dot(g.mu), Y = m.f.cwiseAbs().dot(g.mu);
        const double lhs = std::pow(X, 1.0 + alpha);
        const double rhs = 2.0 * rep.C_LN * A * A * m.r * m.r * std::pow(v(px, A * m.r), -alpha) *
                           std::pow(Y, 2.0 * alpha) * g.energy(m.f);
        const double ratio = lhs / rhs;
        rep.hln_worst_ratio = std::max(rep.hln_worst_ratio, ratio);
        if (!(lhs <= rhs * (1 + 1e-12))) rep.hln_holds = false;
    }
    return rep;
}

} // namespace heatlab
