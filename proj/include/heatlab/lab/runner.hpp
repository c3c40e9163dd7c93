#pragma once

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "heatlab/faber_krahn.hpp"
#include "heatlab/gluing.hpp"
#include "heatlab/lab/config.hpp"
#include "heatlab/nash_machine.hpp"
#include "heatlab/sweeps.hpp"

namespace heatlab::lab {

/// One pass/fail row: `measured relation tolerance`.
struct CheckRow {
    std::string suite, op, params;
    double measured = 0.0;
    std::string relation;  ///< "<=", ">=" or ">"
    double tolerance = 0.0;
    bool pass = false;
};

struct PlotData {
    std::string name;
    std::vector<std::pair<double, double>> xy;
};

struct SuiteResult {
    std::string name;
    std::vector<ConstantEstimate> constants;
    std::vector<CheckRow> checks;
    std::vector<PlotData> plots;
    json info = json::object();
};

struct RunReport {
    std::string space_name, gauge_name, config_hash;
    std::uint64_t seed = 0;
    std::vector<SuiteResult> suites;

    const CheckRow* first_failure() const {
        for (const auto& s : suites)
            for (const auto& c : s.checks)
                if (!c.pass) return &c;
        return nullptr;
    }
    bool all_pass() const { return first_failure() == nullptr; }
};

/// Everything the suites share; built once per run and read concurrently.
struct RunContext {
    const LabConfig& cfg;
    MetricMeasureSpace space;
    VolumeGauge gauge;
    SpectralDecomposition sd;
    std::vector<Ball> balls;

    explicit RunContext(const LabConfig& c)
        : cfg(c), space(build_space(c.space)), gauge(gauge_for(space, c.gauge)), sd(space),
          balls(ball_grid(resolve_centers(c, space), c.ball_radii)) {}

    const Generator& g() const { return sd.generator(); }

private:
    static VolumeGauge gauge_for(const MetricMeasureSpace& s, const GaugeSpec& spec) {
        try {
            return make_gauge(s, spec);
        } catch (const InputError& e) {
            throw SchemaError("/gauge", e.what());
        }
    }
};

inline std::string fnv_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string q_name(double q) { return std::isinf(q) ? std::string("inf") : shortest(q); }

namespace detail {

inline CheckRow check(const std::string& suite, std::string op, std::string params, double measured,
                      const std::string& relation, double tol) {
    CheckRow r{suite, std::move(op), std::move(params), measured, relation, tol, false};
    if (relation == "<=") r.pass = measured <= tol;
    else if (relation == ">=") r.pass = measured >= tol;
    else if (relation == ">") r.pass = measured > tol;
    return r;
}

inline PlotData profile_plot(const std::string& suite, const ConstantEstimate& c) {
    return {suite + "_" + c.tag, c.profile};
}

inline PlotData rate_plot(const std::string& suite, const RateFunction& f) {
    PlotData p{suite + "_" + f.name(), {}};
    for (std::size_t i = 0; i < f.x().size(); ++i) p.xy.emplace_back(f.x()[i], f.y()[i]);
    return p;
}

inline double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

/// Constant row for a scalar that is not a dictionary extremum.
inline ConstantEstimate scalar(std::string tag, double value, NormMode mode, std::string grid, std::string witness) {
    ConstantEstimate c;
    c.tag = std::move(tag);
    c.value = value;
    c.mode = mode;
    c.grid = std::move(grid);
    c.witness.kind = std::move(witness);
    c.evaluated = 1;
    return c;
}

} // namespace detail

/// tstar_t_check, semigroup law, kernel symmetry and Cauchy-Schwarz, weighted norm duality.
inline SuiteResult suite_identities(const RunContext& ctx) {
    const std::string S = "identities";
    const Tolerances& tol = ctx.cfg.tol;
    SuiteResult out{S, {}, {}, {}, json::object()};
    const Vec& mu = ctx.sd.mu();
    const auto& ts = ctx.cfg.t_grid;
    for (double t : ts) {
        const TstarT r = tstar_t_check(ctx.sd, ctx.gauge, t);
        out.checks.push_back(detail::check(S, "tstar_t_check", "t=" + shortest(t), r.max_relative_gap(), "<=", tol.tstar));
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
        const double s = ts[i], t = ts[(i + 1) % ts.size()];
        const Mat composed = heat_operator(ctx.sd, s).K * mu.asDiagonal() * heat_operator(ctx.sd, t).K;
        const Mat direct = heat_operator(ctx.sd, s + t).K;
        const double err = detail::max_abs(composed - direct) / std::max(detail::max_abs(direct), 1e-300);
        out.checks.push_back(detail::check(S, "heat_operator semigroup law", "s=" + shortest(s) + " t=" + shortest(t),
                                           err, "<=", tol.semigroup));
    }
    for (double t : ts) {
        const Mat& K = heat_operator(ctx.sd, t).K;
        const double scale = std::max(detail::max_abs(K), 1e-300);
        const double asym = detail::max_abs(K - K.transpose()) / scale;
        double cs = 0.0;
        for (Index x = 0; x < K.rows(); ++x)
            for (Index y = 0; y < K.cols(); ++y)
                cs = std::max(cs, std::abs(K(x, y)) - std::sqrt(std::max(0.0, K(x, x) * K(y, y))));
        out.checks.push_back(detail::check(S, "heat kernel symmetry", "t=" + shortest(t), asym, "<=", tol.symmetry));
        out.checks.push_back(
            detail::check(S, "heat kernel Cauchy-Schwarz", "t=" + shortest(t), cs / scale, "<=", tol.symmetry));
    }
    const GammaSweep sw = gamma_sweep(ctx.sd, ctx.gauge, {{1.0, 2.0}, {2.0, kInf}, {1.0, kInf}}, ts);
    for (const auto& row : sw.rows) {
        out.checks.push_back(detail::check(S, "gamma_sweep duality",
                                           "p=" + shortest(row.p) + " q=" + q_name(row.q) + " gamma=" + shortest(row.gamma),
                                           row.duality_gap(), "<=", tol.duality));
    }
    out.info["l1_uniform_bound"] = sw.A;
    return out;
}

/// One constant row per inequality tag, with the orderings the implications guarantee.
inline SuiteResult suite_full(const RunContext& ctx) {
    const std::string S = "full";
    const LabConfig& cfg = ctx.cfg;
    const Generator& g = ctx.g();
    SuiteResult out{S, {}, {}, {}, json::object()};
    const TestDictionary dict = make_dictionary(ctx.sd, ctx.balls, {true, 2, 2, cfg.seed});
    auto add = [&](ConstantEstimate c) {
        if (!c.profile.empty()) out.plots.push_back(detail::profile_plot(S, c));
        out.constants.push_back(std::move(c));
    };

    const DoublingProfile P = doubling_profile(ctx.space, ctx.gauge, cfg.r_grid);
    const std::string rg = grid_descriptor("r", cfg.r_grid);
    add(detail::scalar("D^v C_D", P.C_D, NormMode::exact, rg, "doubling_profile"));
    add(detail::scalar("D^v kappa", P.kappa, NormMode::exact, rg, "doubling_profile"));
    add(detail::scalar("D^v kappa'", P.kappa_prime, NormMode::exact, rg, "doubling_profile"));

    const ConstantEstimate N = nash_constant(g, ctx.gauge, cfg.r_grid, dict);
    const ConstantEstimate logN = log_nash_constant(g, ctx.gauge, cfg.r_grid, dict);
    const ConstantEstimate KN = kigami_nash_constant(g, ctx.gauge, cfg.r_grid, dict);
    out.checks.push_back(detail::check(S, "kigami_nash_constant <= nash_constant", "", KN.value, "<=",
                                       N.value * (1 + 1e-12)));

    const NashFromSemigroup nfs = nash_from_semigroup(ctx.sd, ctx.gauge, cfg.r_grid);
    for (std::size_t i = 0; i < cfg.r_grid.size(); ++i)
        out.checks.push_back(detail::check(S, "nash_constant profile <= nash_from_semigroup",
                                           "r=" + shortest(cfg.r_grid[i]), N.profile[i].second, "<=",
                                           nfs.implied[i] * (1 + 1e-12)));
    add(N);
    add(logN);
    add(KN);

    const ConstantEstimate LN = local_nash_constant(g, ctx.gauge, cfg.alpha, dict);
    const ConstantEstimate HLN = local_nash_constant(g, ctx.gauge, cfg.alpha, dict, true);
    out.checks.push_back(detail::check(S, "local_nash_constant homogeneous >= inhomogeneous",
                                       "alpha=" + shortest(cfg.alpha), HLN.value, ">=",
                                       LN.value * (1 - 1e-12)));
    add(LN);
    add(HLN);

    add(due_constant(ctx.sd, ctx.gauge, cfg.t_grid));

    for (double q : cfg.q_list) {
        GNResult gn = gn_constant(ctx.sd, ctx.gauge, q, cfg.r_grid);
        if (std::isinf(q))
            out.checks.push_back(detail::check(S, "gn_constant semigroup <= resolvent", "q=inf", gn.semigroup_norm,
                                               "<=", gn.resolvent_norm + cfg.tol.resolvent));
        add(std::move(gn.resolvent));
        add(std::move(gn.semigroup));
        add(kgn_constant(g, ctx.gauge, q, cfg.r_grid, dict));
        add(ls_constant(g, ctx.gauge, q, dict));
    }

    SubsetFamilyOptions fo;
    fo.seed = cfg.seed;
    const auto family = subset_family(ctx.sd, ctx.balls, fo);
    add(faber_krahn_constant(g, ctx.gauge, cfg.alpha, family));
    add(faber_krahn_constant(g, ctx.gauge, cfg.alpha, family, true));

    out.info["dictionary_members"] = dict.size();
    out.info["fk_candidates"] = family.size();
    return out;
}

/// Finite propagation of L^k, the block norm inequality, and fitted Gaussian constants.
inline SuiteResult suite_propagation(const RunContext& ctx) {
    const std::string S = "propagation";
    const Tolerances& tol = ctx.cfg.tol;
    const Generator& g = ctx.g();
    SuiteResult out{S, {}, {}, {}, json::object()};
    const double h = ctx.space.max_edge_length();
    for (int k = 1; k <= 5; ++k) {
        const double res = propagation_residual(g, generator_power(g, k), k * h, 0.0);
        out.checks.push_back(detail::check(S, "propagation_residual L^k", "k=" + std::to_string(k), res, "<=",
                                           tol.propagation));
    }
    for (auto [p, q] : std::vector<std::pair<double, double>>{{2.0, 2.0}, {1.0, 1.0}, {1.0, kInf}}) {
        const BlockNormBound b = block_norm_bound(g, generator_power(g, 1), 2.0 * h, p, q);
        const double ratio = b.global.upper.value / (b.K0 * b.local.upper.value);
        out.checks.push_back(detail::check(S, "block_norm_bound L",
                                           "p=" + shortest(p) + " q=" + q_name(q) + " K0=" + std::to_string(b.K0),
                                           ratio, "<=", 1.0 + tol.block_norm));
    }
    ConstantEstimate dg;
    dg.tag = "DG";
    dg.mode = NormMode::exact;
    dg.grid = grid_descriptor("t", ctx.cfg.t_grid);
    for (double t : ctx.cfg.t_grid) {
        const GaussianFit fit = fit_gaussian_constant(ctx.sd, t);
        dg.profile.emplace_back(t, fit.C);
        ++dg.evaluated;
        if (fit.C > dg.value) {
            dg.value = fit.C;
            dg.witness = Witness{"kernel pair", fit.arg_x, 0.0, t, {}, {fit.arg_y}};
        }
        if (tol.has_gaussian) {
            out.checks.push_back(detail::check(S, "fit_gaussian_constant lower", "t=" + shortest(t), fit.C, ">=",
                                               tol.gaussian_lo));
            out.checks.push_back(detail::check(S, "fit_gaussian_constant upper", "t=" + shortest(t), fit.C, "<=",
                                               tol.gaussian_hi));
        }
    }
    out.plots.push_back(detail::profile_plot(S, dg));
    out.constants.push_back(std::move(dg));
    return out;
}

/// Local-to-global gluing on random functions at each radius of the gluing grid.
inline SuiteResult suite_gluing(const RunContext& ctx) {
    const std::string S = "gluing";
    SuiteResult out{S, {}, {}, {}, json::object()};
    ConstantEstimate curve;
    curve.tag = "Nglue^v alpha=" + shortest(ctx.cfg.alpha);
    curve.mode = NormMode::upper;
    curve.grid = grid_descriptor("r", ctx.cfg.gluing_r);
    for (double r : ctx.cfg.gluing_r) {
        GluingOptions o;
        o.trials = ctx.cfg.gluing_trials;
        o.alpha = ctx.cfg.alpha;
        o.seed = ctx.cfg.seed;
        const GluingReport rep = local_to_global_check(ctx.space, ctx.gauge, r, o);
        int failed = 0;
        for (const auto& t : rep.trials) failed += !(t.covering && t.l1_sum && t.l2_sum && t.global);
        out.checks.push_back(detail::check(S, "local_to_global_check failing trials",
                                           "r=" + shortest(r) + " trials=" + std::to_string(rep.trials.size()),
                                           failed, "<=", 0.0));
        out.checks.push_back(detail::check(S, "local_to_global_check assembled constant finite", "r=" + shortest(r),
                                           std::isfinite(rep.C_assembled) ? 1.0 : 0.0, ">=", 1.0));
        curve.profile.emplace_back(r, rep.C_assembled);
        ++curve.evaluated;
        if (rep.C_assembled > curve.value) {
            curve.value = rep.C_assembled;
            curve.witness = Witness{"gluing", -1, r, rep.epsilon, {}, {}};
        }
        out.info["r=" + shortest(r)] = {{"K0", rep.K0}, {"m", rep.m}, {"epsilon", rep.epsilon},
                                        {"C_local", rep.C_local}, {"C_assembled", rep.C_assembled}};
    }
    out.plots.push_back(detail::profile_plot(S, curve));
    out.constants.push_back(std::move(curve));
    return out;
}

/// Nash rate pipeline theta -> m -> w for an x-independent gauge, and the extrapolation check.
inline SuiteResult suite_nash_machine(const RunContext& ctx) {
    const std::string S = "nash_machine";
    const LabConfig& cfg = ctx.cfg;
    const Generator& g = ctx.g();
    SuiteResult out{S, {}, {}, {}, json::object()};
    for (double r : cfg.r_grid)
        for (Index x = 0; x < g.size(); ++x) {
            const double a = ctx.gauge(g.support[0], r), b = ctx.gauge(g.support[static_cast<std::size_t>(x)], r);
            if (std::abs(a - b) > 1e-12 * std::max(a, b))
                throw PreconditionError("nash_machine suite: the gauge depends on x at r=" + shortest(r));
        }
    const TestDictionary dict = make_dictionary(ctx.sd, ctx.balls, {false, 2, 2, cfg.seed});
    const ConstantEstimate N = nash_constant(g, ctx.gauge, cfg.r_grid, dict);
    const RateFunction v = sample_rate([&](double r) { return ctx.gauge(g.support[0], r); }, cfg.r_grid, "v");
    const RateFunction th = theta_from_nash(N.value, v);
    std::vector<double> ts;
    for (double r : cfg.r_grid) ts.push_back(r * r / 2.0);
    const RateFunction m = m_from_theta(th, ts);
    const double A = l1_uniform_bound(ctx.sd, ts);
    const RateFunction w = w_from_m(A, m, cfg.r_grid);
    const WVComparison cmp = compare_w_v(w, v, cfg.r_grid);
    out.constants.push_back(detail::scalar("w/v", cmp.C, NormMode::lower, grid_descriptor("r", cfg.r_grid),
                                           "compare_w_v c=" + shortest(cmp.c)));
    out.checks.push_back(detail::check(S, "compare_w_v", "C_N=" + shortest(N.value), cmp.C, ">", 0.0));

    std::vector<double> inv;
    for (double t : cfg.t_grid) inv.push_back(1.0 / norm_p_to_inf(heat_operator(ctx.sd, t), 2.0).value);
    const RateFunction w2(cfg.t_grid, inv, "w_2inf");
    const Extrapolation ex = verify_extrapolation(ctx.sd, w2, 2.0, kInf, cfg.t_grid);
    out.constants.push_back(detail::scalar("Ev_1inf p=2 q=inf", ex.C, NormMode::exact, grid_descriptor("t", cfg.t_grid),
                                           "verify_extrapolation"));
    out.checks.push_back(detail::check(S, "verify_extrapolation spread", "p=2 q=inf", ex.spread, "<=",
                                       cfg.tol.extrapolation_spread));
    for (const RateFunction* f : {&v, &th, &m, &w, &w2}) out.plots.push_back(detail::rate_plot(S, *f));
    out.info["tails"] = json::array();
    for (const RateFunction* f : {&th, &m, &w}) out.info["tails"].push_back(f->tail_json());
    out.info["A"] = A;
    return out;
}

inline SuiteResult run_suite(const std::string& name, const RunContext& ctx) {
    if (name == "identities") return suite_identities(ctx);
    if (name == "full") return suite_full(ctx);
    if (name == "propagation") return suite_propagation(ctx);
    if (name == "gluing") return suite_gluing(ctx);
    if (name == "nash_machine") return suite_nash_machine(ctx);
    throw InputError("unknown suite '" + name + "'");
}

/// Worker count: HEATLAB_THREADS if set and positive, else the hardware concurrency.
inline unsigned thread_cap() {
    if (const char* env = std::getenv("HEATLAB_THREADS")) {
        const long n = std::strtol(env, nullptr, 10);
        if (n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

/// Run every suite; results are merged in declared order whatever the schedule.
inline RunReport run(const LabConfig& cfg, unsigned threads = thread_cap()) {
    RunContext ctx(cfg);
    RunReport rep;
    rep.space_name = ctx.space.name();
    rep.gauge_name = gauge_name(cfg.gauge);
    json hashed = cfg.raw;
    hashed.erase("output");  // where results go does not change them
    rep.config_hash = fnv_hex(hashed.dump());
    rep.seed = cfg.seed;
    const std::size_t n = cfg.suites.size();
    rep.suites.resize(n);
    threads = std::max(1u, threads);
    for (std::size_t start = 0; start < n; start += threads) {
        const std::size_t stop = std::min(n, start + threads);
        if (threads == 1) {
            rep.suites[start] = run_suite(cfg.suites[start], ctx);
            continue;
        }
        std::vector<std::future<SuiteResult>> jobs;
        for (std::size_t i = start; i < stop; ++i)
            jobs.push_back(std::async(std::launch::async, [&, i] { return run_suite(cfg.suites[i], ctx); }));
        for (std::size_t i = start; i < stop; ++i) rep.suites[i] = jobs[i - start].get();
    }
    return rep;
}

inline void write_constants_csv(std::ostream& os, const RunReport& rep) {
    os << "space,gauge,tag,params,value,mode,witness_id,grid_hash\n";
    for (const auto& s : rep.suites)
        for (const auto& c : s.constants) {
            const auto sp = c.tag.find(' ');
            const std::string tag = c.tag.substr(0, sp);
            const std::string params = sp == std::string::npos ? "" : c.tag.substr(sp + 1);
            os << csv_field(rep.space_name) << ',' << csv_field(rep.gauge_name) << ',' << csv_field(tag) << ','
               << csv_field(params) << ',' << shortest(c.value) << ',' << mode_name(c.mode) << ','
               << csv_field(c.witness.id()) << ',' << c.grid_hash() << '\n';
        }
}

inline void write_checks_csv(std::ostream& os, const RunReport& rep) {
    os << "suite,op,params,measured,relation,tolerance,pass\n";
    for (const auto& s : rep.suites)
        for (const auto& c : s.checks)
            os << csv_field(c.suite) << ',' << csv_field(c.op) << ',' << csv_field(c.params) << ','
               << shortest(c.measured) << ',' << csv_field(c.relation) << ',' << shortest(c.tolerance) << ','
               << (c.pass ? "pass" : "fail") << '\n';
}

/// File-name safe version of a plot name.
inline std::string plot_file_name(const std::string& name) {
    std::string out;
    for (char ch : name) {
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '.') out += ch;
        else if (ch == '^') out += "_";
        else if (ch == '\'') out += "prime";
        else if (ch == '=') out += "";
        else out += '_';
    }
    return out + ".csv";
}

/// log10 columns; points with a non-positive coordinate have no logarithm and are dropped.
inline void write_plot_csv(std::ostream& os, const PlotData& p) {
    os << "log10_x,log10_value\n";
    for (const auto& [x, y] : p.xy)
        if (x > 0.0 && y > 0.0 && std::isfinite(x) && std::isfinite(y))
            os << shortest(std::log10(x)) << ',' << shortest(std::log10(y)) << '\n';
}

inline json check_json(const CheckRow& c) {
    return {{"suite", c.suite},         {"op", c.op},     {"params", c.params}, {"measured", shortest(c.measured)},
            {"relation", c.relation}, {"tolerance", shortest(c.tolerance)}, {"pass", c.pass}};
}

inline json report_json(const LabConfig& cfg, const RunReport& rep) {
    json j;
    j["provenance"] = {{"config_hash", rep.config_hash},
                       {"seed", rep.seed},
                       {"space", rep.space_name},
                       {"gauge", rep.gauge_name},
                       {"grids", cfg.raw.at("grids")},
                       {"suites", cfg.suites}};
    j["constants"] = json::array();
    j["checks"] = json::array();
    j["suites"] = json::object();
    std::size_t failed = 0, total = 0;
    for (const auto& s : rep.suites) {
        for (const auto& c : s.constants)
            j["constants"].push_back({{"suite", s.name},
                                      {"tag", c.tag},
                                      {"value", shortest(c.value)},
                                      {"mode", mode_name(c.mode)},
                                      {"witness_id", c.witness.id()},
                                      {"grid", c.grid},
                                      {"grid_hash", c.grid_hash()},
                                      {"evaluated", c.evaluated},
                                      {"skipped", c.skipped}});
        for (const auto& c : s.checks) {
            j["checks"].push_back(check_json(c));
            ++total;
            failed += !c.pass;
        }
        j["suites"][s.name] = s.info;
    }
    j["summary"] = {{"checks", total}, {"failed", failed}};
    return j;
}

inline std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Write every output file under cfg.output. Timestamps go to metadata.json only.
inline void write_outputs(const LabConfig& cfg, const RunReport& rep, const std::string& started, unsigned threads) {
    namespace fs = std::filesystem;
    const fs::path dir(cfg.output);
    fs::create_directories(dir / "plotdata");
    auto open = [](const fs::path& p) {
        std::ofstream os(p, std::ios::binary);
        if (!os) throw std::runtime_error("cannot write " + p.string());
        return os;
    };
    {
        auto os = open(dir / "constants.csv");
        write_constants_csv(os, rep);
    }
    {
        auto os = open(dir / "checks.csv");
        write_checks_csv(os, rep);
    }
    for (const auto& s : rep.suites)
        for (const auto& p : s.plots) {
            auto os = open(dir / "plotdata" / plot_file_name(p.name));
            write_plot_csv(os, p);
        }
    {
        auto os = open(dir / "report.json");
        os << report_json(cfg, rep).dump(2) << '\n';
    }
    {
        auto os = open(dir / "metadata.json");
        const json meta = {{"started", started}, {"finished", utc_now()}, {"threads", threads},
                           {"config_hash", rep.config_hash}};
        os << meta.dump(2) << '\n';
    }
}

} // namespace heatlab::lab
