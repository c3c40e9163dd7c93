#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "heatlab/builders.hpp"
#include "heatlab/doubling.hpp"
#include "heatlab/gauges.hpp"
#include "heatlab/random.hpp"
#include "heatlab/spectral.hpp"

using namespace heatlab;
using Catch::Approx;

namespace {

std::vector<double> sorted_spectrum(const Generator& g) {
    Eigen::SelfAdjointEigenSolver<Mat> es(symmetrized(g), Eigen::EigenvaluesOnly);
    const Vec& e = es.eigenvalues();
    return {e.data(), e.data() + e.size()};
}

void check_space_invariants(const MetricMeasureSpace& s) {
    std::mt19937_64 rng(3);
    CHECK(s.mu().minCoeff() > 0.0);
    for (int k = 0; k < 10; ++k) {
        Vec f(s.size()), g(s.size());
        for (Index i = 0; i < s.size(); ++i) {
            f(i) = uniform_pm1(rng);
            g(i) = uniform_pm1(rng);
        }
        const double a = inner(s.mu(), s.apply_generator(f), g), b = inner(s.mu(), f, s.apply_generator(g));
        CHECK(std::abs(a - b) <= 1e-10 * lp_norm(s.mu(), f, 2) * lp_norm(s.mu(), g, 2));
        CHECK(dirichlet_energy(s, f) >= 0.0);
    }
}

// all interval vertices j..j+m-1 of a path
std::vector<Index> segment(Index start, Index m) {
    std::vector<Index> out;
    for (Index k = 0; k < m; ++k) out.push_back(start + k);
    return out;
}

} // namespace

TEST_CASE("build_torus", "[space_builders]") {
    CHECK_THROWS_AS(build_torus({2}), InputError);
    CHECK_THROWS_AS(build_torus({4, 2}), InputError);

    SECTION("3-cycle spectrum") {
        const auto s = build_torus({3});
        const auto ev = sorted_spectrum(generator_of(s));
        CHECK(ev[0] == Approx(0.0).margin(1e-12));
        CHECK(ev[1] == Approx(3.0));
        CHECK(ev[2] == Approx(3.0));
    }
    SECTION("discrete Fourier spectrum") {
        for (const std::vector<int>& dims : {std::vector<int>{17}, std::vector<int>{5, 7}, std::vector<int>{4, 3, 5}}) {
            for (double h : {1.0, 0.5}) {
                const auto s = build_torus(dims, h);
                std::vector<double> expect{0.0};
                // eigenvalues Σ_k 2(1 − cos(2π j_k / N_k)) / h²
                expect.clear();
                std::function<void(std::size_t, double)> rec = [&](std::size_t k, double acc) {
                    if (k == dims.size()) {
                        expect.push_back(acc);
                        return;
                    }
                    for (int j = 0; j < dims[k]; ++j)
                        rec(k + 1, acc + 2.0 * (1.0 - std::cos(2.0 * M_PI * j / dims[k])) / (h * h));
                };
                rec(0, 0.0);
                std::sort(expect.begin(), expect.end());
                const auto ev = sorted_spectrum(generator_of(s));
                REQUIRE(ev.size() == expect.size());
                for (std::size_t i = 0; i < ev.size(); ++i) CHECK(std::abs(ev[i] - expect[i]) <= 1e-10 * (1 + expect.back()));
            }
        }
    }
    SECTION("Fourier mode is an eigenfunction") {
        const int N = 20, k = 3;
        const auto s = build_torus({N});
        Vec c(N);
        for (int x = 0; x < N; ++x) c(x) = std::cos(2 * M_PI * k * x / N);
        const Vec Lc = s.apply_generator(c);
        CHECK((Lc - 2 * (1 - std::cos(2 * M_PI * k / N)) * c).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("64x64 ball volumes are quadratic") {
        const auto s = build_torus({64, 64});
        for (double r : {2.0, 3.5, 8.0, 16.0}) {
            const double v = ball_volume(s, 0, r);
            CHECK(v >= 0.5 * r * r);
            CHECK(v <= 2.0 * r * r + 1.0);
        }
    }
    SECTION("measure and conductance scaling") {
        const auto s = build_torus({5, 5, 5}, 0.5);
        CHECK(s.mu(0) == Approx(0.125));
        CHECK(s.edges()[0].w == Approx(0.5));
        CHECK(s.edges()[0].len == 0.5);
        check_space_invariants(s);
    }
}

TEST_CASE("build_halfline_weighted", "[space_builders]") {
    const auto unit = build_halfline_weighted(10, 0.0);
    CHECK(unit.mu() == Vec::Ones(10));
    const auto s = build_halfline_weighted(200, 1.0);
    for (int r : {5, 10, 30}) CHECK(ball_volume(s, 0, r) == Approx(r * (r + 1) / 2.0));
    const auto P = doubling_profile(s, ball_volume_gauge(s), geometric_grid(1.0, 50.0, 12));
    CHECK(std::isfinite(P.C_D));
    CHECK(P.C_D <= 8.0);
    CHECK_THROWS_AS(build_halfline_weighted(2, 1.0), InputError);
    check_space_invariants(s);
}

TEST_CASE("build_glued", "[space_builders]") {
    CHECK_THROWS_AS(build_glued(2, 2, {8}), InputError);
    const auto s = build_glued(1, 2, {64, 16});
    CHECK(s.num_components() == 1);
    const Index bridge = s.size() - 1;
    CHECK(s.neighbors(bridge).size() == 2);
    // ring end: linear growth; torus end: quadratic growth
    const Index ring_far = 32, torus_far = 64 + 8 * 16 + 8;
    CHECK(ball_volume(s, ring_far, 6.0) == 11.0);
    CHECK(ball_volume(s, torus_far, 6.0) == 61.0);
    check_space_invariants(s);
}

TEST_CASE("build_vicsek", "[space_builders]") {
    CHECK_THROWS_AS(build_vicsek(5), InputError);
    CHECK_THROWS_AS(build_vicsek(0), InputError);
    const auto g1 = build_vicsek(1);
    CHECK(g1.size() == 5);
    CHECK(g1.edges().size() == 4);
    Index prev = 5;
    for (int g = 2; g <= 4; ++g) {
        const auto s = build_vicsek(g);
        CHECK(s.size() == 5 * prev - 4);
        CHECK(static_cast<Index>(s.edges().size()) == s.size() - 1);  // a tree
        CHECK(s.num_components() == 1);
        prev = s.size();
        if (g <= 3) CHECK(s.diameter() == 2.0 * std::pow(3.0, g - 1));
    }
}

TEST_CASE("dirichlet_restriction", "[space_builders]") {
    SECTION("two vertices, one kept") {
        const auto g = dirichlet_restriction(build_two_vertex(), {0});
        CHECK(g.size() == 1);
        CHECK(g.form(0, 0) == 1.0);
        CHECK(lambda_1(g) == Approx(1.0));
    }
    SECTION("whole connected space") {
        const auto s = build_torus({6, 6});
        CHECK(std::abs(lambda_1(s, all_vertices(s.size()))) < 1e-12);
    }
    SECTION("path segments") {
        const auto s = build_path(40);
        for (int m = 1; m <= 10; ++m)
            CHECK(std::abs(lambda_1(s, segment(5, m)) - 2 * (1 - std::cos(M_PI / (m + 1)))) <= 1e-9);
    }
    SECTION("quadratic form equals energy of the zero extension") {
        std::mt19937_64 rng(9);
        const auto s = build_halfline_weighted(15, 0.7);
        const std::vector<Index> omega{2, 3, 4, 8, 9};
        const auto g = dirichlet_restriction(s, omega);
        for (int k = 0; k < 20; ++k) {
            Vec f(5);
            for (Index i = 0; i < 5; ++i) f(i) = uniform_pm1(rng);
            CHECK(g.energy(f) == Approx(dirichlet_energy(s, g.lift(f))).epsilon(1e-12));
        }
    }
    SECTION("domain monotonicity on nested pairs") {
        for (const auto& s : {build_torus({8, 8}), build_halfline_weighted(30, 1.0), build_vicsek(2)}) {
            std::mt19937_64 rng(mix_seed(17, static_cast<std::uint64_t>(s.size())));
            for (int pair = 0; pair < 20; ++pair) {
                // grow a connected set by BFS from a random seed; Ω₁ is a prefix of Ω₂
                std::vector<Index> order{static_cast<Index>(uniform_index(rng, s.size()))};
                std::vector<char> in(static_cast<std::size_t>(s.size()), 0);
                in[static_cast<std::size_t>(order[0])] = 1;
                const std::size_t target = 2 + uniform_index(rng, static_cast<std::uint64_t>(s.size() / 2));
                while (order.size() < target) {
                    const Index u = order[uniform_index(rng, order.size())];
                    const auto& nb = s.neighbors(u);
                    const Index v = nb[uniform_index(rng, nb.size())].first;
                    if (!in[static_cast<std::size_t>(v)]) {
                        in[static_cast<std::size_t>(v)] = 1;
                        order.push_back(v);
                    }
                }
                const std::size_t cut = 1 + uniform_index(rng, order.size() - 1);
                const std::vector<Index> small(order.begin(), order.begin() + static_cast<long>(cut));
                CHECK(lambda_1(s, small) >= lambda_1(s, order) - 1e-12);
            }
        }
    }
    CHECK_THROWS_AS(dirichlet_restriction(build_path(3), {}), InputError);
}

TEST_CASE("schrodinger and strong positivity", "[space_builders]") {
    const auto path = build_path(22);
    const auto g = dirichlet_restriction(path, segment(1, 20));
    const double l1 = lambda_1(g);

    SECTION("zero potential") {
        const auto m = strong_positivity_margin(g, std::vector<double>(20, 0.0));
        CHECK(m.epsilon == 1.0);
        const auto h = schrodinger(g, {std::vector<double>(20, 0.0), PotentialSign::subtracted});
        CHECK(h.form == g.form);
    }
    SECTION("added constant shifts the spectrum") {
        const auto h = schrodinger(generator_of(build_torus({7})), {std::vector<double>(7, 0.25), PotentialSign::added});
        const auto a = sorted_spectrum(generator_of(build_torus({7}))), b = sorted_spectrum(h);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i] == Approx(a[i] + 0.25));
    }
    SECTION("half of lambda_1 subtracted") {
        const auto m = strong_positivity_margin(g, std::vector<double>(20, l1 / 2));
        CHECK(m.epsilon == Approx(0.5).epsilon(1e-10));
        CHECK(m.epsilon >= 0.5 - 1e-9);
        const auto h = schrodinger(g, {std::vector<double>(20, l1 / 2), PotentialSign::subtracted});
        // εE ≤ E_V ≤ E
        std::mt19937_64 rng(2);
        for (int k = 0; k < 30; ++k) {
            Vec f(20);
            for (Index i = 0; i < 20; ++i) f(i) = uniform_pm1(rng);
            CHECK(h.energy(f) >= m.epsilon * g.energy(f) - 1e-12);
            CHECK(h.energy(f) <= g.energy(f) + 1e-12);
        }
    }
    SECTION("twice lambda_1 is rejected") {
        const auto m = strong_positivity_margin(g, std::vector<double>(20, 2 * l1));
        CHECK(m.epsilon == Approx(-1.0).epsilon(1e-10));
        try {
            schrodinger(g, {std::vector<double>(20, 2 * l1), PotentialSign::subtracted});
            FAIL("expected rejection");
        } catch (const RejectedPotential& e) {
            CHECK(e.margin() < 0);
            CHECK(e.witness().size() == 20);
        }
    }
    SECTION("unrestricted space with a potential") {
        const auto full = generator_of(build_torus({6}));
        CHECK_THROWS_AS(strong_positivity_margin(full, std::vector<double>(6, 0.1)), StructuralError);
    }
}

TEST_CASE("gauge registry", "[space_builders]") {
    const auto s = build_torus({20, 20});
    GaugeSpec spec;
    CHECK(make_gauge(s, spec)(0, 3.0) == ball_volume(s, 0, 3.0));
    spec.kind = GaugeKind::power_of_ball_volume;
    spec.alpha = 0.5;
    spec.beta = 1.0;
    CHECK(make_gauge(s, spec)(5, 4.0) == Approx(std::sqrt(ball_volume(s, 5, 4.0))));
    spec.beta = 2.0;
    CHECK(make_gauge(s, spec)(5, 2.0) == Approx(std::sqrt(ball_volume(s, 5, 4.0))));
    spec.kind = GaugeKind::capped_ball_volume;
    spec.r0 = 3.0;
    CHECK(make_gauge(s, spec)(1, 10.0) == ball_volume(s, 1, 3.0));
    spec.kind = GaugeKind::uniform_power;
    spec.n = 2.0;
    CHECK(make_gauge(s, spec)(1, 3.0) == Approx(9.0));
    spec.kind = GaugeKind::custom_table;
    spec.radii = {1.0, 2.0};
    spec.values.assign(400, {1.0, 4.0});
    const auto tab = make_gauge(s, spec);
    CHECK(tab(0, 0.5) == 1.0);
    CHECK(tab(0, 1.5) == 1.0);
    CHECK(tab(0, 2.0) == 4.0);
    spec.values[3] = {2.0, 1.0};
    CHECK_THROWS_AS(make_gauge(s, spec), InputError);

    SECTION("power gauge with beta = 1 satisfies (D'_v) on a doubling space") {
        GaugeSpec p;
        p.kind = GaugeKind::power_of_ball_volume;
        p.alpha = 0.5;
        const auto h = build_halfline_weighted(60, 1.0);
        const auto P = doubling_profile(h, make_gauge(h, p), geometric_grid(1.0, 15.0, 8));
        CHECK(std::isfinite(P.C_Dprime));
        CHECK(P.C_Dprime <= 4.0);
    }
}
