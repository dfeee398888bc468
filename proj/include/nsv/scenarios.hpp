#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "nsv/runfile.hpp"

namespace nsv {

/// One pass/fail line. `name` is the acceptance criterion id.
struct Criterion {
    std::string name;
    std::string description;
    double value = 0.0;
    std::string relation;  // "<=", ">=", "<", ">", "in"
    double threshold = 0.0;
    double threshold_hi = 0.0;  // upper end for "in"
    bool pass = false;
    nlohmann::json detail = nlohmann::json::object();
};

struct ReportBundle {
    std::string scenario;
    std::vector<Criterion> criteria;
    nlohmann::json metrics = nlohmann::json::object();
    nlohmann::json provenance = nlohmann::json::object();
    std::vector<std::string> files;

    bool passed() const;
    /// {scenario, criteria: [{name, value, threshold, pass, ...}], metrics, provenance, files}
    nlohmann::json to_json() const;
};

struct ScenarioInfo {
    std::string name;
    std::string summary;
    std::vector<std::string> criteria;
};
const std::vector<ScenarioInfo>& scenario_inventory();

/// Runs a named scenario and writes its outputs under rf.out_dir/<name>.
ReportBundle run_scenario(const std::string& name, const RunFile& rf);

/// n_runs random initial data at the common level R = experiment.parameters.energy.
ReportBundle run_ensemble(const RunFile& rf, int n_runs, std::uint64_t seed);

/// levels >= 3 of dt-halving, n-doubling and M-doubling; differences at t = 1.
ReportBundle run_refinement(const RunFile& rf, int levels);

}  // namespace nsv
