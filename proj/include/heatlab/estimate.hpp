#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/dumps.hpp"
#include "heatlab/random.hpp"
#include "heatlab/spectral.hpp"

namespace heatlab {

/// The function, ball or subset achieving an extremum.
struct Witness {
    std::string kind;
    Index x = -1;
    double r = 0.0;
    double s = 0.0;               ///< secondary parameter (time, inner radius) when relevant
    Vec f;                        ///< test function over the generator variables
    std::vector<Index> subset;    ///< Faber–Krahn domain

    std::string id() const {
        std::string out = kind;
        if (x >= 0) out += "@" + std::to_string(x);
        out += " r=" + shortest(r);
        if (s != 0.0) out += " s=" + shortest(s);
        return out;
    }
};

/// One measured constant of a functional inequality.
struct ConstantEstimate {
    std::string tag;
    double value = 0.0;
    NormMode mode = NormMode::exact;
    Witness witness;
    std::string grid;                                 ///< grid descriptor, hashed into grid_hash()
    std::vector<std::pair<double, double>> profile;   ///< (scale, value) curve behind the sup or inf
    std::size_t evaluated = 0;                        ///< number of (function, scale) pairs used
    std::size_t skipped = 0;                          ///< zero functions or degenerate denominators

    std::string grid_hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : grid) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }
};

inline std::string grid_descriptor(const char* name, const std::vector<double>& g) {
    std::string s = std::string(name) + "=[";
    for (std::size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + shortest(g[i]);
    return s + "]";
}

struct Ball {
    Index x = 0;
    double r = 1.0;
};

/// Generator variables in the open ball B(x, r).
inline std::vector<Index> ball_vars(const Generator& g, Index x, double r) {
    std::vector<Index> out;
    for (Index y = 0; y < g.size(); ++y)
        if (g.dist(x, y) < r) out.push_back(y);
    return out;
}

/// All (center, radius) pairs.
inline std::vector<Ball> ball_grid(const std::vector<Index>& centers, const std::vector<double>& radii) {
    std::vector<Ball> out;
    for (Index x : centers)
        for (double r : radii) out.push_back({x, r});
    return out;
}

struct DictMember {
    Vec f;
    Index x = -1;
    double r = 0.0;
    std::string kind;
};

/// Ordered list of test functions; members of a localized dictionary are supported in B(x, r).
struct TestDictionary {
    std::vector<DictMember> members;
    bool localized = true;

    std::size_t size() const { return members.size(); }
};

struct DictionaryOptions {
    bool localized = true;
    int dirichlet_modes = 2;
    int random_members = 2;
    std::uint64_t seed = 0;
};

/// e^{−sL} applied to the indicator of variable x.
inline Vec heat_smoothed_delta(const SpectralDecomposition& sd, Index x, double s) {
    const Mat& phi = sd.eigenvectors();
    const Vec w = (-s * sd.eigenvalues()).array().exp().matrix().cwiseProduct(phi.row(x).transpose()) * sd.mu()(x);
    return phi * w;
}

/// Deltas, heat-smoothed deltas at s ∈ {r²/16, r²/4, r²}, ball indicators, low Dirichlet
/// eigenvectors of the ball and seeded random signs on the ball, for every ball.
inline TestDictionary make_dictionary(const SpectralDecomposition& sd, const std::vector<Ball>& balls,
                                      const DictionaryOptions& opt = {}) {
    const Generator& g = sd.generator();
    TestDictionary d;
    d.localized = opt.localized;
    auto push = [&](Vec f, const Ball& b, std::string kind, const std::vector<Index>& B) {
        if (opt.localized) {
            Vec mask = Vec::Zero(g.size());
            for (Index y : B) mask(y) = 1.0;
            f = f.cwiseProduct(mask);
        }
        if (f.cwiseAbs().maxCoeff() > 0.0) d.members.push_back({std::move(f), b.x, b.r, std::move(kind)});
    };
    for (std::size_t bi = 0; bi < balls.size(); ++bi) {
        const Ball& b = balls[bi];
        if (b.x < 0 || b.x >= g.size()) throw InputError("make_dictionary: center out of range");
        if (!(b.r > 0.0)) throw InputError("make_dictionary: radius must be > 0");
        const std::vector<Index> B = ball_vars(g, b.x, b.r);
        Vec delta = Vec::Zero(g.size());
        delta(b.x) = 1.0;
        push(delta, b, "delta", B);
        for (double s : {b.r * b.r / 16.0, b.r * b.r / 4.0, b.r * b.r})
            push(heat_smoothed_delta(sd, b.x, s), b, "heat s=" + shortest(s), B);
        Vec ind = Vec::Zero(g.size());
        for (Index y : B) ind(y) = 1.0;
        push(ind, b, "ball", B);
        if (opt.dirichlet_modes > 0) {
            const Generator gb = dirichlet_restriction(g, B);
            Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(gb));
            const Index k = std::min<Index>(opt.dirichlet_modes, gb.size());
            for (Index j = 0; j < k; ++j) {
                const Vec u = gb.mu.cwiseSqrt().cwiseInverse().cwiseProduct(es.eigenvectors().col(j));
                Vec f = Vec::Zero(g.size());
                for (std::size_t i = 0; i < B.size(); ++i) f(B[i]) = u(static_cast<Index>(i));
                if (f.sum() < 0.0) f = -f;
                push(f, b, "dirichlet k=" + std::to_string(j), B);
            }
        }
        for (int j = 0; j < opt.random_members; ++j) {
            std::mt19937_64 rng(mix_seed(opt.seed, static_cast<std::uint64_t>(b.x),
                                         static_cast<std::uint64_t>(std::llround(b.r * 1024.0)),
                                         static_cast<std::uint64_t>(j)));
            Vec f = Vec::Zero(g.size());
            for (Index y : B) f(y) = random_sign(rng);
            push(f, b, "random " + std::to_string(j), B);
        }
    }
    return d;
}

/// ‖f w‖₁ for a weight vector.
inline double weighted_l1(const Vec& mu, const Vec& f, const Vec& w) {
    return (f.cwiseAbs().cwiseProduct(w).cwiseProduct(mu)).sum();
}

} // namespace heatlab
