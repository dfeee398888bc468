// nsv: command-line runner for the Navier-Stokes-Voigt memory scenarios.
//
//   nsv list
//   nsv run <scenario> [--config FILE] [--seed N] [--out DIR]
//   nsv check [--config FILE] [--seed N] [--out DIR]
//   nsv ensemble --runs N [--config FILE] [--seed N] [--out DIR]
//
// Exit status: 0 when every criterion passes, 1 on a failed criterion,
// 2 on invalid input, 3 on blow-up.

#include <cstdio>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "nsv/error.hpp"
#include "nsv/runfile.hpp"
#include "nsv/scenarios.hpp"
#include "nsv/simd.hpp"

namespace {

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "runfile (JSON); built-in defaults when omitted");
    sub->add_option("--seed", c.seed, "override experiment.seed");
    sub->add_option("--out", c.out, "override output.directory");
}

nsv::RunFile load(const Common& c) {
    nsv::RunFile rf = c.config.empty() ? nsv::default_runfile() : nsv::load_runfile(c.config);
    if (c.seed) rf.seed = *c.seed;
    if (!c.out.empty()) rf.out_dir = c.out;
    return rf;
}

int report(const nsv::ReportBundle& b) {
    for (const auto& c : b.criteria) {
        std::printf("[%s] %-22s %-3s value=%.6g threshold=%.6g", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.relation.c_str(), c.value, c.threshold);
        if (c.relation == "in") std::printf("..%.6g", c.threshold_hi);
        std::printf("\n");
    }
    for (const auto& f : b.files)
        if (f.ends_with("summary.json")) std::printf("summary: %s\n", f.c_str());
    return b.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Navier-Stokes-Voigt with memory and Ekman damping: spectral experiments"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "print the selected kernel ISA");

    auto* list = app.add_subcommand("list", "scenario inventory");

    Common run_opts;
    std::string scenario;
    auto* run = app.add_subcommand("run", "run one scenario");
    run->add_option("scenario", scenario, "scenario name (see list)")->required();
    add_common(run, run_opts);

    Common check_opts;
    auto* check = app.add_subcommand("check", "alias of 'run selfcheck'");
    add_common(check, check_opts);

    Common ens_opts;
    int runs = 4;
    auto* ens = app.add_subcommand("ensemble", "random initial data at a common energy level");
    ens->add_option("--runs", runs, "number of members (>= 2)");
    add_common(ens, ens_opts);

    CLI11_PARSE(app, argc, argv);
    if (verbose) std::fprintf(stderr, "kernels: %s\n", nsv::simd::active().name);

    try {
        if (*list) {
            for (const auto& s : nsv::scenario_inventory()) {
                std::printf("%-13s %s\n", s.name.c_str(), s.summary.c_str());
                for (const auto& c : s.criteria) std::printf("%15s- %s\n", "", c.c_str());
            }
            return 0;
        }
        if (*run) return report(nsv::run_scenario(scenario, load(run_opts)));
        if (*check) return report(nsv::run_scenario("selfcheck", load(check_opts)));
        if (*ens) {
            nsv::RunFile rf = load(ens_opts);
            nsv::ReportBundle b = nsv::run_ensemble(rf, runs, rf.seed);
            std::cout << b.metrics.dump(2) << '\n';
            return 0;
        }
    } catch (const nsv::BlowUpError& e) {
        std::fprintf(stderr, "nsv: blow-up: %s (t=%g, E=%g)\n", e.what(), e.t, e.energy);
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "nsv: %s\n", e.what());
        return 2;
    }
    return 0;
}
