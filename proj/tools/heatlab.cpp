// heatlab: run inequality sweeps and verification suites from a JSON config.
//
// Exit codes: 0 success, 1 a verify row failed, 2 config schema violation,
// 3 numerical precondition failure.

#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "heatlab/lab/runner.hpp"

namespace {

enum Exit { ok = 0, verify_failed = 1, schema = 2, precondition = 3 };

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const heatlab::lab::SchemaError& e) {
        std::cerr << "heatlab: config error at " << e.what() << '\n';
        return schema;
    } catch (const heatlab::RejectedPotential& e) {
        std::cerr << "heatlab: rejected potential: " << e.what() << '\n';
        return precondition;
    } catch (const heatlab::PreconditionError& e) {
        std::cerr << "heatlab: precondition failed: " << e.what() << '\n';
        return precondition;
    } catch (const heatlab::StructuralError& e) {
        std::cerr << "heatlab: structural error: " << e.what() << '\n';
        return precondition;
    } catch (const heatlab::UnsupportedError& e) {
        std::cerr << "heatlab: unsupported: " << e.what() << '\n';
        return precondition;
    } catch (const heatlab::InputError& e) {
        std::cerr << "heatlab: invalid input: " << e.what() << '\n';
        return precondition;
    }
}

int run_or_verify(const std::string& file, const std::vector<std::string>& sets, bool verify) {
    using namespace heatlab::lab;
    const LabConfig cfg = load_config(file, sets);
    const std::string started = utc_now();
    const unsigned threads = thread_cap();
    const RunReport rep = run(cfg, threads);
    write_outputs(cfg, rep, started, threads);
    std::size_t rows = 0;
    for (const auto& s : rep.suites) rows += s.checks.size();
    if (const CheckRow* bad = rep.first_failure()) {
        if (verify) {
            std::cerr << "FAIL " << bad->suite << ": " << bad->op << " [" << bad->params << "] measured "
                      << heatlab::shortest(bad->measured) << " " << bad->relation << " "
                      << heatlab::shortest(bad->tolerance) << " does not hold\n";
            return verify_failed;
        }
        std::cout << "heatlab: some check rows failed; see " << cfg.output << "/checks.csv\n";
    }
    std::cout << "heatlab: " << rows << " check rows, outputs in " << cfg.output << '\n';
    return ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"heatlab: heat kernel and functional inequality lab"};
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> sets;
    auto* run = app.add_subcommand("run", "execute the suites of a config and write the reports");
    run->add_option("config", config, "config JSON")->required();
    run->add_option("--set", sets, "override a config key, e.g. --set grids.r_grid=[1,2,4]");

    auto* verify = app.add_subcommand("verify", "run and exit non-zero unless every check row passes");
    verify->add_option("config", config, "config JSON")->required();
    verify->add_option("--set", sets, "override a config key");

    auto* dump = app.add_subcommand("dump-space", "print the configured space as JSON");
    dump->add_option("config", config, "config JSON")->required();
    dump->add_option("--set", sets, "override a config key");

    CLI11_PARSE(app, argc, argv);

    if (*run) return guarded([&] { return run_or_verify(config, sets, false); });
    if (*verify) return guarded([&] { return run_or_verify(config, sets, true); });
    return guarded([&] {
        const auto cfg = heatlab::lab::load_config(config, sets);
        std::cout << heatlab::space_to_json(heatlab::lab::build_space(cfg.space)).dump(2) << '\n';
        return 0;
    });
}
