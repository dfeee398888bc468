#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "nsv/model.hpp"

namespace nsv {

/// A parsed experiment file. JSON with the sections domain, model, kernel,
/// damping, forcing, time, history, experiment and output; every section is
/// optional and unknown keys are rejected with their path.
struct RunFile {
    std::string origin;     // file path or "<string>"
    nlohmann::json doc;     // as parsed
    ModelConfig model;
    std::string scenario;   // experiment.name, may be empty
    std::uint64_t seed = 1;
    nlohmann::json parameters = nlohmann::json::object();
    std::string out_dir = "nsv-out";
    std::vector<std::string> formats{"csv", "json"};
    std::uint64_t hash = 0;  // FNV-1a of the canonical document

    bool wants(const std::string& format) const;
};

RunFile parse_runfile(const std::string& text, const std::string& origin = "<string>");
RunFile load_runfile(const std::string& path);

/// The built-in defaults (2D, n=64, dt=1e-3, M=256, t_end=20, forced).
RunFile default_runfile();

/// FNV-1a 64 over the compact dump of a JSON document (keys sorted).
std::uint64_t config_hash(const nlohmann::json& doc);
std::string hex64(std::uint64_t v);

/// Reads experiment.parameters with defaults; keys outside `allowed` are rejected.
class Parameters {
public:
    Parameters(const nlohmann::json& p, std::vector<std::string> allowed, const std::string& scenario);
    double number(const std::string& key, double fallback) const;
    std::vector<double> list(const std::string& key, std::vector<double> fallback) const;

private:
    nlohmann::json p_;
    std::string scenario_;
};

}  // namespace nsv
