// Acceptance driver: runs every scenario from configs/ and prints one line
// per criterion. Thresholds live in nsv/thresholds.hpp.
//
//   acceptance [scenario...]     (default: all)
//
// Output goes to $NSV_ACCEPTANCE_OUT or ./acceptance-out.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "nsv/runfile.hpp"
#include "nsv/scenarios.hpp"
#include "nsv/simd.hpp"
#include "nsv/thresholds.hpp"

namespace fs = std::filesystem;

namespace {

// Order of the acceptance table.
const std::vector<std::string> kCriteria = {
    "energy_equality",       "monotone_decay",   "decay_damped", "decay_undamped",
    "absorbing_ball",        "continuous_dependence", "history_fidelity", "dual_memory",
    "structural_identities", "splitting",        "singular_limit", "dtu_budget",
};

struct Outcome {
    bool pass = true;
    std::vector<std::string> lines;
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> wanted;
    for (int i = 1; i < argc; ++i) wanted.emplace_back(argv[i]);
    const char* env = std::getenv("NSV_ACCEPTANCE_OUT");
    const fs::path out = env ? fs::path(env) : fs::current_path() / "acceptance-out";
    std::printf("acceptance: thresholds %s, kernels %s, output %s\n", nsv::thresholds::kVersion,
                nsv::simd::active().name, out.string().c_str());

    std::map<std::string, Outcome> by_name;
    bool all = true;
    for (const auto& info : nsv::scenario_inventory()) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), info.name) == wanted.end()) continue;
        const fs::path cfg = fs::path(NSV_SOURCE_DIR) / "configs" / (info.name + ".json");
        const auto t0 = std::chrono::steady_clock::now();
        try {
            nsv::RunFile rf = nsv::load_runfile(cfg.string());
            rf.out_dir = out.string();
            const nsv::ReportBundle b = nsv::run_scenario(info.name, rf);
            const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::fprintf(stderr, "  %-13s %6.1f s\n", info.name.c_str(), sec);
            for (const auto& c : b.criteria) {
                char buf[256];
                if (c.relation == "in")
                    std::snprintf(buf, sizeof buf, "%s: %.6g in [%.6g, %.6g]", info.name.c_str(), c.value, c.threshold,
                                  c.threshold_hi);
                else
                    std::snprintf(buf, sizeof buf, "%s: %.6g %s %.6g", info.name.c_str(), c.value, c.relation.c_str(),
                                  c.threshold);
                Outcome& o = by_name[c.name];
                o.pass = o.pass && c.pass;
                o.lines.emplace_back(buf);
            }
        } catch (const std::exception& e) {
            std::fprintf(stderr, "  %-13s error: %s\n", info.name.c_str(), e.what());
            for (const auto& c : info.criteria) {
                Outcome& o = by_name[c];
                o.pass = false;
                o.lines.push_back(info.name + ": error: " + e.what());
            }
        }
    }

    for (const auto& name : kCriteria) {
        auto it = by_name.find(name);
        if (it == by_name.end()) continue;
        std::string joined;
        for (const auto& l : it->second.lines) joined += (joined.empty() ? "" : "; ") + l;
        std::printf("[%s] %-22s %s\n", it->second.pass ? "PASS" : "FAIL", name.c_str(), joined.c_str());
        all = all && it->second.pass;
    }
    std::printf("%s\n", all ? "acceptance: all criteria pass" : "acceptance: FAILED");
    return all ? 0 : 1;
}
