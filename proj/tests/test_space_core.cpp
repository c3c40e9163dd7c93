#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "heatlab/builders.hpp"
#include "heatlab/doubling.hpp"
#include "heatlab/generator.hpp"
#include "heatlab/random.hpp"
#include "heatlab/space_io.hpp"

using namespace heatlab;
using Catch::Approx;

namespace {

Vec random_vec(std::mt19937_64& rng, Index n) {
    Vec f(n);
    for (Index i = 0; i < n; ++i) f(i) = uniform_pm1(rng);
    return f;
}

MetricMeasureSpace irregular_space() {
    // weighted graph with two components, non-unit lengths and measures
    std::vector<Edge> e{{0, 1, 2.0, 0.5}, {1, 2, 0.5, 1.5}, {0, 2, 1.0, 3.0}, {2, 3, 3.0, 1.0}, {4, 5, 1.0, 2.0}};
    return MetricMeasureSpace({1.0, 0.5, 2.0, 1.5, 0.25, 1.0}, e, "irregular");
}

} // namespace

TEST_CASE("dirichlet_energy examples", "[space_core]") {
    const auto two = build_two_vertex();
    CHECK(dirichlet_energy(two, Vec::Map(std::vector<double>{0, 1}.data(), 2)) == 1.0);
    const auto path = build_path(3);
    Vec f(3);
    f << 0, 1, 2;
    CHECK(dirichlet_energy(path, f) == 2.0);
    CHECK(dirichlet_energy(build_torus({5, 4}), Vec::Constant(20, 3.7)) == 0.0);
    CHECK_THROWS_AS(dirichlet_energy(path, Vec::Zero(2)), InputError);
}

TEST_CASE("lp_norm examples", "[space_core]") {
    Vec f(2);
    f << 3, 4;
    CHECK(lp_norm(Vec::Ones(2), f, 2) == Approx(5.0));
    Vec mu(2);
    mu << 2, 1;
    CHECK(lp_norm(mu, Vec::Ones(2), 1) == 3.0);
    f << -2, 1;
    CHECK(lp_norm(Vec::Ones(2), f, kInf) == 2.0);
    CHECK_THROWS_AS(lp_norm(Vec::Ones(2), f, 0.5), InputError);
}

TEST_CASE("ball and ball_volume", "[space_core]") {
    const auto path = build_path(5);
    CHECK(ball_volume(path, 2, 1.5) == 3.0);
    CHECK(ball(path, 2, 1.5) == std::vector<Index>{1, 2, 3});
    CHECK(ball(path, 2, 0.5) == std::vector<Index>{2});
    CHECK(ball_volume(path, 2, 0.5) == path.mu(2));
    CHECK(ball_volume(path, 0, 10.0) == path.total_mass());
    // open balls: distance exactly r is excluded
    CHECK(ball(path, 0, 2.0) == std::vector<Index>{0, 1});
    CHECK_THROWS_AS(ball(path, 0, 0.0), InputError);
}

TEST_CASE("metric over components", "[space_core]") {
    const auto s = irregular_space();
    CHECK(s.num_components() == 2);
    CHECK(std::isinf(s.dist(0, 4)));
    CHECK(s.dist(0, 2) == 2.0);  // 0.5 + 1.5 beats 3.0
    CHECK(ball_volume(s, 4, 100.0) == 1.25);
    for (Index x = 0; x < s.size(); ++x)
        for (Index y = 0; y < s.size(); ++y) {
            CHECK(s.dist(x, y) == s.dist(y, x));
            CHECK((s.dist(x, y) == 0.0) == (x == y));
            for (Index z = 0; z < s.size(); ++z)
                if (std::isfinite(s.dist(x, z)) && std::isfinite(s.dist(z, y)))
                    CHECK(s.dist(x, y) <= s.dist(x, z) + s.dist(z, y) + 1e-15);
        }
}

TEST_CASE("self-adjointness and energy identity", "[space_core][property]") {
    std::mt19937_64 rng(11);
    for (const auto& s : {irregular_space(), build_torus({6, 5}), build_halfline_weighted(12, 1.5)}) {
        const auto& mu = s.mu();
        for (int k = 0; k < 100; ++k) {
            const Vec f = random_vec(rng, s.size()), g = random_vec(rng, s.size());
            const double lhs = inner(mu, s.apply_generator(f), g), rhs = inner(mu, f, s.apply_generator(g));
            CHECK(std::abs(lhs - rhs) <= 1e-10 * lp_norm(mu, f, 2) * lp_norm(mu, g, 2));
            const double e = dirichlet_energy(s, f);
            CHECK(std::abs(e - inner(mu, s.apply_generator(f), f)) <= 1e-10 * (1 + std::pow(lp_norm(mu, f, 2), 2)));
            CHECK(e >= 0.0);
            const Generator gen = generator_of(s);
            CHECK(gen.energy(f) == Approx(e).epsilon(1e-12));
        }
    }
}

TEST_CASE("Hölder monotonicity on probability spaces", "[space_core][property]") {
    std::mt19937_64 rng(5);
    std::vector<double> mu{0.1, 0.2, 0.3, 0.15, 0.25};
    const Vec m = Vec::Map(mu.data(), 5);
    const std::vector<double> ps{1, 1.5, 2, 3, 7, kInf};
    for (int k = 0; k < 50; ++k) {
        const Vec f = random_vec(rng, 5);
        for (std::size_t i = 0; i + 1 < ps.size(); ++i)
            CHECK(lp_norm(m, f, ps[i]) <= lp_norm(m, f, ps[i + 1]) * (1 + 1e-14));
    }
}

TEST_CASE("doubling_profile examples", "[space_core]") {
    SECTION("complete graph K4") {
        const auto k4 = build_complete(4);
        const auto P = doubling_profile(k4, ball_volume_gauge(k4), geometric_grid(0.01, 2.0, 60));
        CHECK(P.C_D == 4.0);
    }
    SECTION("single vertex") {
        const MetricMeasureSpace one;
        const auto P = doubling_profile(one, ball_volume_gauge(one), {0.5, 1.0, 2.0});
        CHECK(P.C_D == 1.0);
        CHECK(P.kappa == 0.0);
    }
    SECTION("64x64 torus") {
        const auto t = build_torus({64, 64});
        const auto P = doubling_profile(t, ball_volume_gauge(t), geometric_grid(1.0, 16.0, 17), {0, 2080});
        CHECK(P.kappa >= 1.7);
        CHECK(P.kappa <= 2.3);
    }
    SECTION("empty grid") {
        const auto t = build_path(4);
        CHECK_THROWS_AS(doubling_profile(t, ball_volume_gauge(t), {}), InputError);
    }
}

TEST_CASE("doubling two-sided bound holds on the fitting grid", "[space_core][property]") {
    for (const auto& s : {build_halfline_weighted(40, 1.0), build_torus({12, 12}), build_glued(1, 2, {16, 8})}) {
        const VolumeGauge v = ball_volume_gauge(s);
        const auto grid = geometric_grid(1.0, 8.0, 9);
        const auto P = doubling_profile(s, v, grid);
        CHECK(P.kappa >= P.kappa_prime);
        CHECK(P.kappa_prime >= 0.0);
        for (Index x = 0; x < s.size(); ++x)
            for (std::size_t i = 0; i < grid.size(); ++i)
                for (std::size_t j = 0; j <= i; ++j) {
                    const double ratio = v(x, grid[i]) / v(x, grid[j]);
                    const double q = grid[i] / grid[j];
                    CHECK(ratio <= P.C_upper * std::pow(q, P.kappa) * (1 + 1e-12));
                    CHECK(ratio >= P.c_lower * std::pow(q, P.kappa_prime) * (1 - 1e-12));
                }
        const TwoExponentEnvelope w = envelope_of(P);
        CHECK(w(3.0, 3.0) == P.C_upper);
        CHECK(w(4.0, 2.0) <= w(6.0, 2.0));
    }
}

TEST_CASE("bounded_covering", "[space_core]") {
    SECTION("single vertex") {
        const MetricMeasureSpace one;
        const auto c = bounded_covering(one, 3.0);
        CHECK(c.centers.size() == 1);
        CHECK(c.cutoffs[0](0) == 1.0);
        CHECK(c.K0 == 1);
    }
    SECTION("16x16 torus, r = 4") {
        const auto t = build_torus({16, 16});
        const auto c = bounded_covering(t, 4.0);
        CHECK(c.K0 <= 25);
    }
    SECTION("net and cutoff contract") {
        for (const auto& s : {build_path(9), build_torus({10, 10}), build_halfline_weighted(30, 0.5)}) {
            for (double r : {1.0, 2.0, 4.0}) {
                const auto c = bounded_covering(s, r);
                for (std::size_t i = 0; i < c.centers.size(); ++i)
                    for (std::size_t j = 0; j < i; ++j) CHECK(s.dist(c.centers[i], c.centers[j]) >= r / 2.0);
                Vec sum = Vec::Zero(s.size());
                for (std::size_t i = 0; i < c.centers.size(); ++i) {
                    const Vec& rho = c.cutoffs[i];
                    CHECK(rho.minCoeff() >= 0.0);
                    CHECK(rho.maxCoeff() <= 1.0);
                    for (Index y : ball(s, c.centers[i], r / 2.0)) CHECK(rho(y) == 1.0);
                    for (Index y = 0; y < s.size(); ++y)
                        if (rho(y) > 0.0) CHECK(s.dist(c.centers[i], y) < r);
                    sum += rho;
                }
                CHECK(sum.minCoeff() >= 1.0);
                CHECK(sum.maxCoeff() <= c.K0);
            }
        }
    }
    SECTION("greedy net on the unit path") {
        const auto net = greedy_net(build_path(9), 3.0);
        CHECK(net == std::vector<Index>{0, 3, 6});
    }
}

TEST_CASE("space JSON round trip is bit exact", "[space_core]") {
    std::vector<Edge> e{{0, 1, 0.1, 1.0 / 3.0}, {1, 2, 1e-300, 2.5}, {2, 0, 12345.678901234567, 0.7}};
    const MetricMeasureSpace s({0.3, 1.0 / 7.0, 2e10}, e, "rt");
    const auto j = space_to_json(s);
    const auto back = space_from_json(nlohmann::json::parse(j.dump()));
    REQUIRE(back.size() == 3);
    for (Index x = 0; x < 3; ++x) CHECK(back.mu(x) == s.mu(x));
    for (std::size_t k = 0; k < e.size(); ++k) {
        CHECK(back.edges()[k].w == e[k].w);
        CHECK(back.edges()[k].len == e[k].len);
    }
    CHECK_THROWS_AS(space_from_json(nlohmann::json::parse(R"({"vertices": 2, "mu": [1]})")), InputError);
}

TEST_CASE("constructor validation", "[space_core]") {
    CHECK_THROWS_AS(MetricMeasureSpace({1.0, 0.0}, {}), InputError);
    CHECK_THROWS_AS(MetricMeasureSpace({1.0, 1.0}, {{0, 0, 1.0, 1.0}}), InputError);
    CHECK_THROWS_AS(MetricMeasureSpace({1.0, 1.0}, {{0, 1, 1.0, 1.0}, {1, 0, 2.0, 1.0}}), InputError);
    CHECK_THROWS_AS(MetricMeasureSpace({1.0, 1.0}, {{0, 1, 1.0, 0.0}}), InputError);
}
