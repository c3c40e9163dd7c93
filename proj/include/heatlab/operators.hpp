#pragma once

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <string>
#include <vector>

#include "heatlab/generator.hpp"

namespace heatlab {

/// Dirichlet restriction to Ω: keeps the full diagonal, drops coupling to the exterior.
///
/// Ω lists variables of `g` (for a full generator, parent vertices).
inline Generator dirichlet_restriction(const Generator& g, std::vector<Index> omega) {
    if (omega.empty()) throw InputError("dirichlet_restriction: empty subset");
    std::sort(omega.begin(), omega.end());
    omega.erase(std::unique(omega.begin(), omega.end()), omega.end());
    for (Index i : omega)
        if (i < 0 || i >= g.size()) throw InputError("dirichlet_restriction: index out of range");
    const Index m = static_cast<Index>(omega.size());
    Generator r;
    r.space = g.space;
    r.mu.resize(m);
    r.form.resize(m, m);
    r.support.resize(omega.size());
    for (Index a = 0; a < m; ++a) {
        const Index ia = omega[static_cast<std::size_t>(a)];
        r.support[static_cast<std::size_t>(a)] = g.support[static_cast<std::size_t>(ia)];
        r.mu(a) = g.mu(ia);
        for (Index b = 0; b < m; ++b) r.form(a, b) = g.form(ia, omega[static_cast<std::size_t>(b)]);
    }
    r.label = g.label + "|Dir(" + std::to_string(m) + ")";
    return r;
}

inline Generator dirichlet_restriction(const MetricMeasureSpace& s, std::vector<Index> omega) {
    return dirichlet_restriction(generator_of(s), std::move(omega));
}

/// Symmetrized matrix M^{-1/2} A M^{-1/2}.
inline Mat symmetrized(const Generator& g) {
    const Vec is = g.mu.cwiseSqrt().cwiseInverse();
    Mat S = is.asDiagonal() * g.form * is.asDiagonal();
    return 0.5 * (S + S.transpose());
}

/// Smallest eigenvalue of the generator.
inline double lambda_1(const Generator& g) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(g), Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

/// Smallest Dirichlet eigenvalue of Ω ⊂ space.
inline double lambda_1(const MetricMeasureSpace& s, const std::vector<Index>& omega) {
    return lambda_1(dirichlet_restriction(s, omega));
}

enum class PotentialSign { added, subtracted };

struct PotentialSpec {
    std::vector<double> values;  ///< 𝒱 ≥ 0 per variable of the generator
    PotentialSign sign = PotentialSign::subtracted;
};

struct PositivityMargin {
    double epsilon = 1.0;  ///< 1 − sup ‖𝒱^{1/2} f‖²/E(f)
    Vec witness;           ///< maximizing f
};

/// ε = 1 − (largest generalized eigenvalue of the pair (𝒱·mu, form)).
inline PositivityMargin strong_positivity_margin(const Generator& g, const std::vector<double>& potential) {
    if (static_cast<Index>(potential.size()) != g.size())
        throw InputError("strong_positivity_margin: potential length differs from generator size");
    Vec V = Vec::Map(potential.data(), g.size());
    if ((V.array() < 0.0).any()) throw InputError("strong_positivity_margin: potential must be >= 0");
    PositivityMargin out;
    if (V.isZero(0.0)) {
        out.epsilon = 1.0;
        out.witness = Vec::Zero(g.size());
        return out;
    }
    // positive definiteness of E on the admissible class
    const double lmin = lambda_1(g);
    const double scale = g.form.diagonal().cwiseQuotient(g.mu).maxCoeff();
    if (!(lmin > 1e-10 * std::max(1.0, scale)))
        throw StructuralError("strong_positivity_margin: the form is degenerate (constants have zero energy); "
                              "restrict to a Dirichlet subset before subtracting a potential");
    Mat Vm = V.cwiseProduct(g.mu).asDiagonal();
    Mat A = 0.5 * (g.form + g.form.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(Vm, A);
    const Index top = es.eigenvalues().size() - 1;
    out.epsilon = 1.0 - es.eigenvalues()(top);
    out.witness = es.eigenvectors().col(top);
    return out;
}

/// Schrödinger generator L ∓ 𝒱. Subtracted potentials need a positive margin.
inline Generator schrodinger(const Generator& g, const PotentialSpec& pot) {
    if (static_cast<Index>(pot.values.size()) != g.size())
        throw InputError("schrodinger: potential length differs from generator size");
    Vec V = Vec::Map(pot.values.data(), g.size());
    if ((V.array() < 0.0).any()) throw InputError("schrodinger: potential must be >= 0");
    Generator r = g;
    if (pot.sign == PotentialSign::subtracted && !V.isZero(0.0)) {
        const PositivityMargin m = strong_positivity_margin(g, pot.values);
        if (!(m.epsilon > 0.0))
            throw RejectedPotential("schrodinger: subtracted potential is not strongly positive (epsilon = " +
                                        std::to_string(m.epsilon) + ")",
                                    m.epsilon, std::vector<double>(m.witness.data(), m.witness.data() + m.witness.size()));
    }
    const double sgn = pot.sign == PotentialSign::added ? 1.0 : -1.0;
    r.form.diagonal() += sgn * V.cwiseProduct(g.mu);
    r.label = g.label + (pot.sign == PotentialSign::added ? "+V" : "-V");
    r.is_full = false;
    return r;
}

} // namespace heatlab
