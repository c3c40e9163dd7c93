#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/estimate.hpp"

namespace heatlab {

/// A candidate domain Ω inside its declared ball B(x, r).
struct FKCandidate {
    Index x = 0;
    double r = 1.0;
    std::vector<Index> omega;  ///< sorted generator variables
    std::string kind;
};

struct SubsetFamilyOptions {
    std::size_t cap = 200;                     ///< per ball
    int random_subsets = 40;
    std::vector<double> sub_radius_fractions{0.25, 0.5, 0.75, 1.0};
    std::vector<double> levels{0.75, 0.5, 0.25, 0.1};  ///< heat super-level thresholds relative to the peak
    std::uint64_t seed = 0;
};

/// Default family: sub-balls B(y, s) ⊂ B(x, r), seeded random connected subsets grown by
/// BFS, and super-level sets of e^{−(r²/4)L}δ_x inside the ball. At most `cap` per ball.
inline std::vector<FKCandidate> subset_family(const SpectralDecomposition& sd, const std::vector<Ball>& balls,
                                              const SubsetFamilyOptions& opt = {}) {
    const Generator& g = sd.generator();
    std::vector<FKCandidate> out;
    for (const Ball& b : balls) {
        const std::vector<Index> B = ball_vars(g, b.x, b.r);
        std::set<std::vector<Index>> seen;
        std::vector<FKCandidate> mine;
        auto add = [&](std::vector<Index> omega, std::string kind) {
            if (omega.empty() || mine.size() >= opt.cap) return;
            std::sort(omega.begin(), omega.end());
            if (!seen.insert(omega).second) return;
            mine.push_back({b.x, b.r, std::move(omega), std::move(kind)});
        };
        add(B, "ball");
        auto sub_ball = [&](Index y, double s) {
            std::vector<Index> sub = ball_vars(g, y, s);
            const bool inside = std::all_of(sub.begin(), sub.end(), [&](Index z) { return g.dist(b.x, z) < b.r; });
            if (inside) add(std::move(sub), "subball y=" + std::to_string(y) + " s=" + shortest(s));
        };
        for (double frac : opt.sub_radius_fractions) sub_ball(b.x, frac * b.r);
        // heat super-level sets
        const Vec h = heat_smoothed_delta(sd, b.x, b.r * b.r / 4.0);
        for (double level : opt.levels) {
            std::vector<Index> sub;
            for (Index y : B)
                if (h(y) >= level * h(b.x)) sub.push_back(y);
            add(std::move(sub), "level " + shortest(level));
        }
        // random connected subsets grown inside the ball
        std::mt19937_64 rng(mix_seed(opt.seed, static_cast<std::uint64_t>(b.x),
                                     static_cast<std::uint64_t>(std::llround(b.r * 1024.0)), 0xfcULL));
        std::vector<char> in_ball(static_cast<std::size_t>(g.size()), 0);
        for (Index y : B) in_ball[static_cast<std::size_t>(y)] = 1;
        for (int k = 0; k < opt.random_subsets && mine.size() < opt.cap; ++k) {
            const Index start = B[uniform_index(rng, B.size())];
            const std::size_t target = 1 + uniform_index(rng, B.size());
            std::vector<Index> grown{start};
            std::vector<char> taken(static_cast<std::size_t>(g.size()), 0);
            taken[static_cast<std::size_t>(start)] = 1;
            std::vector<Index> frontier;
            auto push_nbrs = [&](Index u) {
                for (Index z = 0; z < g.size(); ++z)
                    if (z != u && g.form(u, z) != 0.0 && in_ball[static_cast<std::size_t>(z)] &&
                        !taken[static_cast<std::size_t>(z)])
                        frontier.push_back(z);
            };
            push_nbrs(start);
            while (grown.size() < target && !frontier.empty()) {
                const std::size_t pick = uniform_index(rng, frontier.size());
                const Index z = frontier[pick];
                frontier[pick] = frontier.back();
                frontier.pop_back();
                if (taken[static_cast<std::size_t>(z)]) continue;
                taken[static_cast<std::size_t>(z)] = 1;
                grown.push_back(z);
                push_nbrs(z);
            }
            add(std::move(grown), "random " + std::to_string(k));
        }
        // off-center sub-balls fill what is left of the cap
        for (double frac : opt.sub_radius_fractions)
            for (Index y : B) {
                if (mine.size() >= opt.cap) break;
                if (y != b.x) sub_ball(y, frac * b.r);
            }
        for (auto& c : mine) out.push_back(std::move(c));
    }
    return out;
}

/// λ₁(Ω) with eigenvalues below round-off clamped to zero.
inline double dirichlet_lambda1(const Generator& g, const std::vector<Index>& omega) {
    const Generator gd = dirichlet_restriction(g, omega);
    const double l = lambda_1(gd);
    const double scale = gd.form.diagonal().cwiseQuotient(gd.mu).maxCoeff();
    return l < 1e-12 * std::max(1.0, scale) ? 0.0 : l;
}

/// Relative Faber–Krahn constant c = inf r²λ₁(Ω)(μ(Ω)/v_r(x))^α over the family;
/// `tilde` uses (r²λ₁(Ω) + 1) instead. The family bounds the optimal c from above.
inline ConstantEstimate faber_krahn_constant(const Generator& g, const VolumeGauge& v, double alpha,
                                             const std::vector<FKCandidate>& family, bool tilde = false) {
    if (!(alpha > 0.0)) throw InputError("faber_krahn_constant: alpha must be > 0");
    if (family.empty()) throw InputError("faber_krahn_constant: empty subset family");
    ConstantEstimate c;
    c.tag = std::string(tilde ? "FKtilde^v" : "FK^v") + " alpha=" + shortest(alpha);
    c.mode = NormMode::upper;
    c.value = kInf;
    std::vector<double> radii, vals;
    for (const FKCandidate& cand : family) {
        for (Index y : cand.omega)
            if (!(g.dist(cand.x, y) < cand.r))
                throw InputError("faber_krahn_constant: candidate '" + cand.kind + "' leaves its ball");
        double m = 0.0;
        for (Index y : cand.omega) m += g.mu(y);
        const double l1 = dirichlet_lambda1(g, cand.omega);
        const double vx = v(g.support[static_cast<std::size_t>(cand.x)], cand.r);
        const double val = (cand.r * cand.r * l1 + (tilde ? 1.0 : 0.0)) * std::pow(m / vx, alpha);
        vals.push_back(val);
        ++c.evaluated;
        if (val < c.value) {
            c.value = val;
            c.witness = Witness{cand.kind, cand.x, cand.r, l1, {}, cand.omega};
        }
        if (std::find(radii.begin(), radii.end(), cand.r) == radii.end()) radii.push_back(cand.r);
    }
    std::sort(radii.begin(), radii.end());
    for (double r : radii) {
        double best = kInf;
        for (std::size_t i = 0; i < family.size(); ++i)
            if (family[i].r == r) best = std::min(best, vals[i]);
        c.profile.emplace_back(r, best);
    }
    c.grid = grid_descriptor("ball_r", radii);
    return c;
}

struct Truncation {
    double lhs = 0.0;  ///< ‖f‖₂²
    double rhs = 0.0;  ///< 4∫(f−λ)₊² + 2λ‖f‖₁
};

/// Both sides of ‖f‖₂² ≤ 4∫(f−λ)₊² dμ + 2λ‖f‖₁ for f ≥ 0.
inline Truncation truncation_check(const Vec& mu, const Vec& f, double lambda) {
    if (f.size() != mu.size()) throw InputError("truncation_check: dimension mismatch");
    if (!(lambda > 0.0)) throw InputError("truncation_check: lambda must be > 0");
    if ((f.array() < 0.0).any())
        throw InputError("truncation_check: f must be >= 0; apply to the positive and negative parts separately");
    Truncation t;
    t.lhs = f.cwiseAbs2().dot(mu);
    const Vec over = (f.array() - lambda).max(0.0).matrix();
    t.rhs = 4.0 * over.cwiseAbs2().dot(mu) + 2.0 * lambda * f.dot(mu);
    return t;
}

} // namespace heatlab
