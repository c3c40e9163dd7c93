#pragma once

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/generator.hpp"
#include "heatlab/operators.hpp"

namespace heatlab {

/// Dense kernel with the measure-weighted action Tf(x) = Σ_y K(x,y) f(y) mu(y).
struct KernelOperator {
    Mat K;
    Vec mu;
    std::string label;

    Index size() const { return K.rows(); }

    Vec apply(const Vec& f) const { return K * f.cwiseProduct(mu); }

    /// Adjoint in the mu pairing: (T*g)(y) = Σ_x K(x,y) g(x) mu(x).
    Vec apply_adjoint(const Vec& g) const { return K.transpose() * g.cwiseProduct(mu); }

    /// Matrix of the action on coordinate vectors.
    Mat action_matrix() const { return K * mu.asDiagonal(); }

    /// Operator T ∘ S as a kernel.
    KernelOperator compose(const KernelOperator& S) const {
        return {K * mu.asDiagonal() * S.K, mu, label + "*" + S.label};
    }
};

/// Identity action: K(x,y) = δ_xy / mu(y).
inline KernelOperator identity_kernel(const Vec& mu) {
    return {Mat(mu.cwiseInverse().asDiagonal()), mu, "identity"};
}

/// Eigendecomposition of the generator with mu-orthonormal eigenvectors φ_k = M^{-1/2} u_k.
class SpectralDecomposition {
public:
    explicit SpectralDecomposition(Generator g) : g_(std::move(g)) {
        Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(g_));
        if (es.info() != Eigen::Success) throw PreconditionError("eigendecomposition failed");
        lambda_ = es.eigenvalues();
        const double tol = 1e-12 * (1.0 + std::abs(lambda_(lambda_.size() - 1)));
        for (Index k = 0; k < lambda_.size(); ++k)
            if (lambda_(k) < 0.0 && lambda_(k) > -tol) lambda_(k) = 0.0;
        phi_ = g_.mu.cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors();
    }

    explicit SpectralDecomposition(const MetricMeasureSpace& s) : SpectralDecomposition(generator_of(s)) {}

    const Generator& generator() const { return g_; }
    const Vec& eigenvalues() const { return lambda_; }
    const Mat& eigenvectors() const { return phi_; }
    const Vec& mu() const { return g_.mu; }
    Index size() const { return g_.size(); }
    double lambda_max() const { return lambda_(lambda_.size() - 1); }

    /// Kernel of F(L) from spectral values F(λ_k); symmetrized.
    KernelOperator kernel_from_values(const Vec& values, std::string label) const {
        Mat K = phi_ * values.asDiagonal() * phi_.transpose();
        K = 0.5 * (K + K.transpose()).eval();
        return {std::move(K), g_.mu, std::move(label)};
    }

    template <class F>
    KernelOperator kernel(F&& f, std::string label) const {
        Vec vals(lambda_.size());
        for (Index k = 0; k < lambda_.size(); ++k) {
            vals(k) = f(lambda_(k));
            if (!std::isfinite(vals(k)))
                throw InputError("spectral function is undefined at lambda = " + std::to_string(lambda_(k)));
        }
        return kernel_from_values(vals, std::move(label));
    }

    /// max |(L − Σ λ_k φ_k⟨φ_k,·⟩)| entrywise on the action matrix.
    double reconstruction_residual() const {
        Mat Lmat = g_.mu.cwiseInverse().asDiagonal() * g_.form;
        Mat R = phi_ * lambda_.asDiagonal() * phi_.transpose() * g_.mu.asDiagonal();
        return (Lmat - R).cwiseAbs().maxCoeff();
    }

private:
    Generator g_;
    Vec lambda_;
    Mat phi_;
};

inline std::string fmt_param(const char* name, double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') s.pop_back();
    return std::string(name) + "=" + s;
}

/// e^{−tL}.
inline KernelOperator heat_operator(const SpectralDecomposition& sd, double t) {
    if (!(t >= 0.0)) throw InputError("heat_operator: t must be >= 0");
    return sd.kernel([t](double l) { return std::exp(-t * l); }, "heat " + fmt_param("t", t));
}

/// (I + tL)^{−β/2}.
inline KernelOperator resolvent_power(const SpectralDecomposition& sd, double t, double beta) {
    if (!(t >= 0.0)) throw InputError("resolvent_power: t must be >= 0");
    if (!(beta > 0.0)) throw InputError("resolvent_power: beta must be > 0");
    return sd.kernel([t, beta](double l) { return std::pow(1.0 + t * l, -beta / 2.0); },
                     "resolvent " + fmt_param("t", t) + " " + fmt_param("beta", beta));
}

/// Integral form (1/Γ(β/2)) ∫₀^∞ e^{−s} s^{β/2−1} e^{−stL} ds evaluated by quadrature per eigenvalue.
///
/// With s = u^{2/β} the integrand becomes (2/β) e^{−(1+tλ)u^{2/β}}, smooth at 0.
inline KernelOperator resolvent_power_quadrature(const SpectralDecomposition& sd, double t, double beta) {
    if (!(t >= 0.0)) throw InputError("resolvent_power_quadrature: t must be >= 0");
    if (!(beta > 0.0)) throw InputError("resolvent_power_quadrature: beta must be > 0");
    boost::math::quadrature::exp_sinh<double> integrator;
    const double g = std::tgamma(beta / 2.0);
    const double e = 2.0 / beta;
    return sd.kernel(
        [&](double l) {
            const double a = 1.0 + t * l;
            auto f = [a, e](double u) { return std::exp(-a * std::pow(u, e)); };
            return e * integrator.integrate(f, 1e-14) / g;
        },
        "resolvent-quad " + fmt_param("t", t) + " " + fmt_param("beta", beta));
}

/// cos(r√L).
inline KernelOperator wave_operator(const SpectralDecomposition& sd, double r) {
    if (!(r >= 0.0)) throw InputError("wave_operator: r must be >= 0");
    return sd.kernel([r](double l) { return std::cos(r * std::sqrt(l)); }, "wave " + fmt_param("r", r));
}

/// sin(r√L), used for the energy identity.
inline KernelOperator sine_wave_operator(const SpectralDecomposition& sd, double r) {
    return sd.kernel([r](double l) { return std::sin(r * std::sqrt(l)); }, "sine-wave " + fmt_param("r", r));
}

/// Φ(r√L).
inline KernelOperator spectral_filter(const SpectralDecomposition& sd, const std::function<double(double)>& phi,
                                      double r, std::string label = "filter") {
    return sd.kernel([&](double l) { return phi(r * std::sqrt(l)); }, label + " " + fmt_param("r", r));
}

/// Ψ(λ) = (λ − sin λ)/λ³, Ψ(0) = 1/6.
inline double psi_filter(double x) {
    const double a = std::abs(x);
    if (a < 1e-2) {
        const double x2 = x * x;
        return 1.0 / 6.0 - x2 / 120.0 + x2 * x2 / 5040.0;
    }
    return (a - std::sin(a)) / (a * a * a);
}

/// sin²λ/λ², 1 at 0.
inline double sinc2_filter(double x) {
    if (std::abs(x) < 1e-8) return 1.0;
    const double s = std::sin(x) / x;
    return s * s;
}

/// Fourier transform of (1 − s²)₊^a normalized to 1 at 0:
/// Γ(a+3/2)(2/λ)^{a+1/2} J_{a+1/2}(λ).
inline std::function<double(double)> transmutation_profile(double a) {
    if (!(a > 0.0)) throw InputError("transmutation_profile: a must be > 0");
    const double nu = a + 0.5;
    const double g = std::tgamma(a + 1.5);
    return [nu, g](double x) {
        const double ax = std::abs(x);
        if (ax < 1e-6) return 1.0 - ax * ax / (4.0 * (nu + 1.0));
        return g * std::pow(2.0 / ax, nu) * std::cyl_bessel_j(nu, ax);
    };
}

/// Kernel of the polynomial Σ c_k L^k built by matrix products, so exact zeros survive.
inline KernelOperator polynomial_filter(const Generator& g, const std::vector<double>& coeffs,
                                        std::string label = "poly") {
    const Index n = g.size();
    Mat L = g.mu.cwiseInverse().asDiagonal() * g.form;
    Mat P = Mat::Zero(n, n);
    Mat Lk = Mat::Identity(n, n);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        if (k) Lk = (L * Lk).eval();
        if (coeffs[k] != 0.0) P += coeffs[k] * Lk;
    }
    return {P * g.mu.cwiseInverse().asDiagonal(), g.mu, std::move(label)};
}

/// Kernel of L^k.
inline KernelOperator generator_power(const Generator& g, int k) {
    std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
    c.back() = 1.0;
    return polynomial_filter(g, c, "L^" + std::to_string(k));
}

} // namespace heatlab
