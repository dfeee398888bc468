#pragma once

#include "nsv/grid.hpp"
#include "nsv/history.hpp"
#include "nsv/kernel.hpp"

namespace nsv {

struct HistoryConfig {
    HistoryMode mode = HistoryMode::prony;
    std::size_t M = 256;
    double s_max_factor = 40.0;
    double ds_min = 0.0;  // 0 means dt
};

struct ModelConfig {
    GridPtr grid;
    double alpha = 0.1;
    double beta = 0.5;
    double theta = 0.0;
    Kernel kernel = Kernel::exponential_sum({{1.0, 1.0}});
    bool instantaneous = false;  // memory replaced by Au
    SpectralField forcing;       // empty means zero
    double varrho = 0.0;
    double dt = 1e-3;
    double t_end = 20.0;
    int stride = 10;
    HistoryConfig history;
    double eps_report = 1e-2;

    void validate() const;
    long steps() const;
    SGrid sgrid() const;
    SpectralField forcing_or_zero() const;
};

/// U = (u, eta) at time t.
struct State {
    SpectralField u;
    HistoryField eta;
    double t = 0.0;
};

/// Zero history on the configured lag grid.
HistoryField make_history(const ModelConfig& cfg);

State make_state(const ModelConfig& cfg, SpectralField u0);

/// Same configuration with the memory kernel collapsed to the instantaneous term.
ModelConfig instantaneous_limit(ModelConfig cfg);

}  // namespace nsv
