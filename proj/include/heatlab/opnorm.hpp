#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "heatlab/random.hpp"
#include "heatlab/spectral.hpp"

namespace heatlab {

enum class NormMode { exact, upper, lower };

inline const char* mode_name(NormMode m) {
    switch (m) {
    case NormMode::exact: return "exact";
    case NormMode::upper: return "upper";
    case NormMode::lower: return "lower";
    }
    return "?";
}

struct NormEstimate {
    double value = 0.0;
    NormMode mode = NormMode::exact;
    std::string method;
    Vec witness;          ///< optimal or best input function, when available
    Index arg_row = -1;   ///< argmax row for p→∞ closed forms
    Index arg_col = -1;   ///< argmax column for 1→q closed forms
};

/// Lower and upper estimates of one norm; both carry mode exact when the closed form applies.
struct NormBounds {
    NormEstimate lower;
    NormEstimate upper;

    bool exact() const { return upper.mode == NormMode::exact; }
    double value() const { return upper.value; }
};

/// Hölder conjugate.
inline double conjugate(double p) {
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

/// GammaRange endpoints.
inline double gamma_minus(double p, double q) {
    return std::max(1.0 / (2.0 * p) - 1.0 / q, 0.0);
}
inline double gamma_plus(double p, double q) {
    return std::min(1.0 / p - 1.0 / q, 0.5 - 1.0 / (2.0 * q));
}

struct GammaRange {
    double minus = 0.0;
    double plus = 0.0;
};

inline GammaRange gamma_range(double p, double q) { return {gamma_minus(p, q), gamma_plus(p, q)}; }

/// ‖T‖_{1→q} = sup_y ‖K(·,y)‖_q.
inline NormEstimate norm_1_to_q(const KernelOperator& T, double q) {
    NormEstimate e;
    e.method = "column-sup";
    for (Index y = 0; y < T.K.cols(); ++y) {
        const double v = lp_norm(T.mu, T.K.col(y), q);
        if (v > e.value || e.arg_col < 0) {
            e.value = v;
            e.arg_col = y;
        }
    }
    e.witness = Vec::Zero(T.K.cols());
    if (e.arg_col >= 0) e.witness(e.arg_col) = 1.0 / T.mu(e.arg_col);
    return e;
}

/// ‖T‖_{p→∞} = sup_x ‖K(x,·)‖_{p'}.
inline NormEstimate norm_p_to_inf(const KernelOperator& T, double p) {
    const double pc = conjugate(p);
    NormEstimate e;
    e.method = "row-sup";
    for (Index x = 0; x < T.K.rows(); ++x) {
        const double v = lp_norm(T.mu, T.K.row(x).transpose(), pc);
        if (v > e.value || e.arg_row < 0) {
            e.value = v;
            e.arg_row = x;
        }
    }
    if (e.arg_row >= 0) {
        const Vec k = T.K.row(e.arg_row).transpose();
        Vec f(k.size());
        if (std::isinf(pc)) {
            f = Vec::Zero(k.size());
            Index j;
            k.cwiseAbs().maxCoeff(&j);
            f(j) = (k(j) >= 0 ? 1.0 : -1.0) / T.mu(j);
        } else {
            for (Index i = 0; i < k.size(); ++i)
                f(i) = std::copysign(std::pow(std::abs(k(i)), pc - 1.0), k(i));
            const double nf = lp_norm(T.mu, f, p);
            if (nf > 0) f /= nf;
        }
        e.witness = f;
    }
    return e;
}

/// ‖T‖_{2→2}: top singular value of M^{1/2} K M^{1/2}.
inline NormEstimate norm_2_to_2(const KernelOperator& T) {
    const Vec s = T.mu.cwiseSqrt();
    Mat A = s.asDiagonal() * T.K * s.asDiagonal();
    NormEstimate e;
    e.method = "singular-value";
    if (A.rows() == A.cols() && A.isApprox(A.transpose(), 0.0)) {
        Eigen::SelfAdjointEigenSolver<Mat> es(A);
        Index k;
        e.value = es.eigenvalues().cwiseAbs().maxCoeff(&k);
        e.witness = s.cwiseInverse().cwiseProduct(es.eigenvectors().col(k));
    } else {
        Eigen::BDCSVD<Mat> svd(A, Eigen::ComputeThinV);
        e.value = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
        if (svd.matrixV().cols()) e.witness = s.cwiseInverse().cwiseProduct(svd.matrixV().col(0));
    }
    return e;
}

struct OpnormOptions {
    int iterations = 200;
    int random_starts = 8;
    double stall = 1e-10;
    std::uint64_t seed = 0x5eedULL;
    int rt_grid = 32;
};

namespace detail {

inline bool is_anchor(double a, double b) {
    return a == 1.0 || b == 0.0 || (a == 0.5 && b == 0.5);
}

inline NormEstimate anchor_norm(const KernelOperator& T, double a, double b) {
    if (a == 1.0) return norm_1_to_q(T, b == 0.0 ? kInf : 1.0 / b);
    if (b == 0.0) return norm_p_to_inf(T, a == 0.0 ? kInf : 1.0 / a);
    return norm_2_to_2(T);
}

/// Riesz–Thorin bound at (a,b) = (1/p,1/q) from exact anchors on the edges a = 1, b = 0 and (½,½).
inline NormEstimate riesz_thorin_upper(const KernelOperator& T, double a, double b, int K) {
    std::map<std::pair<double, double>, double> cache;
    auto N = [&](double aa, double bb) {
        auto key = std::make_pair(aa, bb);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const double v = anchor_norm(T, aa, bb).value;
        cache.emplace(key, v);
        return v;
    };
    NormEstimate e;
    e.mode = NormMode::upper;
    e.method = "riesz-thorin";
    e.value = kInf;
    auto consider = [&](double a0, double b0, double a1, double b1, double theta) {
        // (a,b) = theta·P0 + (1 − theta)·P1
        if (!(theta >= 0.0 && theta <= 1.0)) return;
        const double v0 = theta > 0.0 ? std::pow(N(a0, b0), theta) : 1.0;
        const double v1 = theta < 1.0 ? std::pow(N(a1, b1), 1.0 - theta) : 1.0;
        e.value = std::min(e.value, v0 * v1);
    };
    // segments between (1,s) and (u,0)
    for (int k = 0; k <= K; ++k) {
        const double s = b + (1.0 - b) * k / K;
        if (!(s > 0.0)) continue;
        const double theta = b / s;
        if (theta >= 1.0) continue;
        const double u = (a - theta) / (1.0 - theta);
        if (u < -1e-15 || u > 1.0 + 1e-15) continue;
        consider(1.0, s, std::clamp(u, 0.0, 1.0), 0.0, theta);
    }
    // ray from (½,½) through (a,b) to the edges a = 1 or b = 0
    const double da = a - 0.5, db = b - 0.5;
    if (da > 0.0) {
        const double lam = 0.5 / da;  // reach a = 1
        const double bb = 0.5 + lam * db;
        if (bb >= 0.0 && bb <= 1.0 && lam >= 1.0) consider(0.5, 0.5, 1.0, bb, 1.0 - 1.0 / lam);
    }
    if (db < 0.0) {
        const double lam = -0.5 / db;  // reach b = 0
        const double aa = 0.5 + lam * da;
        if (aa >= 0.0 && aa <= 1.0 && lam >= 1.0) consider(0.5, 0.5, aa, 0.0, 1.0 - 1.0 / lam);
    }
    return e;
}

inline Vec duality_map(const Vec& g, double r) {
    // |g|^{r−1} sign(g), computed on g/max|g| (the scale is normalized away by the caller)
    const double m = g.cwiseAbs().maxCoeff();
    Vec out(g.size());
    if (m == 0.0) return Vec::Zero(g.size());
    for (Index i = 0; i < g.size(); ++i) out(i) = std::copysign(std::pow(std::abs(g(i)) / m, r - 1.0), g(i));
    return out;
}

/// Boyd-type ascent for f ↦ ‖Tf‖_q/‖f‖_p from several deterministic starts.
inline NormEstimate ascent_lower(const KernelOperator& T, double p, double q, const OpnormOptions& opt) {
    const Index n = T.K.cols();
    const double pc = conjugate(p);
    std::vector<Vec> starts;
    {
        Index top = 0;
        (T.K.rowwise().squaredNorm()).maxCoeff(&top);
        Vec e = Vec::Zero(n);
        e(top) = 1.0;
        starts.push_back(e);
    }
    std::mt19937_64 rng(opt.seed);
    for (int s = 0; s < opt.random_starts; ++s) {
        Vec f(n);
        for (Index i = 0; i < n; ++i) f(i) = uniform_pm1(rng);
        starts.push_back(f);
    }
    NormEstimate best;
    best.mode = NormMode::lower;
    best.method = "duality-ascent";
    for (Vec f : starts) {
        double nf = lp_norm(T.mu, f, p);
        if (!(nf > 0)) continue;
        f /= nf;
        double prev = -1.0;
        for (int it = 0; it < opt.iterations; ++it) {
            const Vec g = T.apply(f);
            const double ratio = lp_norm(T.mu, g, q);
            if (ratio > best.value) {
                best.value = ratio;
                best.witness = f;
            }
            if (prev >= 0.0 && ratio - prev <= opt.stall * std::max(ratio, 1e-300)) break;
            prev = ratio;
            const Vec u = T.apply_adjoint(duality_map(g, q));
            Vec fn = duality_map(u, pc);
            nf = lp_norm(T.mu, fn, p);
            if (!(nf > 0)) break;
            f = fn / nf;
        }
    }
    return best;
}

} // namespace detail

/// Operator norm L^p(mu) → L^q(mu) of a kernel operator, 1 ≤ p ≤ q ≤ ∞.
///
/// Closed forms for p = 1, q = ∞ and (2,2); other pairs return a Riesz–Thorin upper
/// bound and an ascent lower bound.
inline NormBounds opnorm(const KernelOperator& T, double p, double q, const OpnormOptions& opt = {}) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw InputError("opnorm: exponents must be >= 1");
    if (p > q) throw UnsupportedError("opnorm: p > q is not supported");
    const double a = 1.0 / p, b = 1.0 / q;
    NormBounds out;
    if (detail::is_anchor(a, b)) {
        NormEstimate e = detail::anchor_norm(T, a, b);
        e.mode = NormMode::exact;
        out.lower = e;
        out.upper = e;
        return out;
    }
    out.upper = detail::riesz_thorin_upper(T, a, b, opt.rt_grid);
    out.lower = detail::ascent_lower(T, p, q, opt);
    return out;
}

/// Kernel diag(left)·K·diag(right).
inline KernelOperator weighted_kernel(const KernelOperator& T, const Vec& left, const Vec& right,
                                      std::string label = {}) {
    KernelOperator W{left.asDiagonal() * T.K * right.asDiagonal(), T.mu, label.empty() ? T.label : label};
    return W;
}

/// Kernel v(x,√t)^γ p_t(x,y) v(y,√t)^δ with δ = 1/p − 1/q − γ.
inline KernelOperator weighted_heat_kernel(const SpectralDecomposition& sd, const VolumeGauge& v, double p,
                                           double q, double gamma, double t) {
    const double delta = 1.0 / p - 1.0 / q - gamma;
    const Vec vt = sd.generator().gauge_at(v, std::sqrt(t));
    const Vec l = vt.array().pow(gamma).matrix();
    const Vec r = vt.array().pow(delta).matrix();
    return weighted_kernel(heat_operator(sd, t), l, r, "vEv " + fmt_param("t", t));
}

/// (vEv_{p,q,γ}) at a single t.
inline NormBounds weighted_norm_functional(const SpectralDecomposition& sd, const VolumeGauge& v, double p,
                                           double q, double gamma, double t, const OpnormOptions& opt = {}) {
    if (!(t > 0.0)) throw InputError("weighted_norm_functional: t must be > 0");
    return opnorm(weighted_heat_kernel(sd, v, p, q, gamma, t), p, q, opt);
}

struct TstarT {
    double lhs = 0.0;   ///< ‖v^{1/2} e^{−tL} v^{1/2}‖_{1→∞}
    double rhs1 = 0.0;  ///< ‖v^{1/2} e^{−(t/2)L}‖²_{2→∞}
    double rhs2 = 0.0;  ///< ‖e^{−(t/2)L} v^{1/2}‖²_{1→2}

    double max_relative_gap() const {
        const double m = std::max({std::abs(lhs), std::abs(rhs1), std::abs(rhs2), 1e-300});
        return std::max({std::abs(lhs - rhs1), std::abs(lhs - rhs2), std::abs(rhs1 - rhs2)}) / m;
    }
};

/// The three sides of ‖T*T‖_{1→∞} = ‖T*‖²_{2→∞} = ‖T‖²_{1→2} with v = v(·,√t).
inline TstarT tstar_t_check(const SpectralDecomposition& sd, const VolumeGauge& v, double t) {
    if (!(t > 0.0)) throw InputError("tstar_t_check: t must be > 0");
    const Vec h = sd.generator().gauge_at(v, std::sqrt(t)).cwiseSqrt();
    const Vec one = Vec::Ones(h.size());
    const KernelOperator full = heat_operator(sd, t);
    const KernelOperator half = heat_operator(sd, t / 2.0);
    TstarT r;
    r.lhs = norm_p_to_inf(weighted_kernel(full, h, h), 1.0).value;
    const double a = norm_p_to_inf(weighted_kernel(half, h, one), 2.0).value;
    const double b = norm_1_to_q(weighted_kernel(half, one, h), 2.0).value;
    r.rhs1 = a * a;
    r.rhs2 = b * b;
    return r;
}

} // namespace heatlab
