#pragma once

#include <string>
#include <vector>

#include "heatlab/space.hpp"

namespace heatlab {

/// Nonnegative self-adjoint operator L = M⁻¹A on functions over a subset of a parent space.
///
/// `form` is the symmetric matrix of the quadratic form, so E(f) = fᵀ·form·f and
/// ⟨Lf,g⟩_mu = fᵀ·form·g. Variables are indexed 0..size()-1 and map to parent
/// vertices through `support`.
struct Generator {
    MetricMeasureSpace space;
    std::vector<Index> support;
    Vec mu;
    Mat form;
    std::string label;

    Index size() const { return mu.size(); }

    double energy(const Vec& f) const { return f.dot(form * f); }

    Vec apply(const Vec& f) const { return (form * f).cwiseQuotient(mu); }

    double dist(Index i, Index j) const {
        return space.dist(support[static_cast<std::size_t>(i)], support[static_cast<std::size_t>(j)]);
    }

    /// Zero extension to the parent vertex set.
    Vec lift(const Vec& f) const {
        Vec out = Vec::Zero(space.size());
        for (std::size_t i = 0; i < support.size(); ++i) out(support[i]) = f(static_cast<Index>(i));
        return out;
    }

    /// Gauge values v(x, r) over the support.
    Vec gauge_at(const VolumeGauge& v, double r) const { return v.at(support, r); }

    /// True when the support is the whole parent and the form is D − W.
    bool is_full = false;
};

inline Generator generator_of(const MetricMeasureSpace& s) {
    Generator g;
    g.space = s;
    g.support = all_vertices(s.size());
    g.mu = s.mu();
    g.form = s.form_matrix();
    g.label = s.name().empty() ? "L" : "L[" + s.name() + "]";
    g.is_full = true;
    return g;
}

} // namespace heatlab
