#include "nsv/model.hpp"

#include <cmath>

#include "nsv/error.hpp"

namespace nsv {

void ModelConfig::validate() const {
    if (!grid) throw ValidationError("model: grid not set");
    if (!(alpha > 0.0)) throw ValidationError("model: alpha must be > 0");
    if (!(beta >= 0.0)) throw ValidationError("model: beta must be >= 0");
    if (!(theta >= 0.0)) throw ValidationError("model: theta must be >= 0");
    if (!(dt > 0.0)) throw ValidationError("model: dt must be > 0");
    if (!(t_end >= 0.0)) throw ValidationError("model: t_end must be >= 0");
    if (stride < 1) throw ValidationError("model: stride must be >= 1");
    if (!forcing.empty() && !forcing.grid().same_as(*grid)) throw DimensionError("model: forcing on a different grid");
    if (!instantaneous && history.mode == HistoryMode::prony && !kernel.is_exponential())
        throw UnsupportedError("model: Prony history mode needs an exponential-sum kernel");
    dafermos_rate(kernel);
}

long ModelConfig::steps() const { return std::lround(t_end / dt); }

SGrid ModelConfig::sgrid() const {
    const double ds = history.ds_min > 0.0 ? history.ds_min : dt;
    return default_sgrid(kernel, history.M, ds, history.s_max_factor);
}

SpectralField ModelConfig::forcing_or_zero() const { return forcing.empty() ? SpectralField(grid) : forcing; }

HistoryField make_history(const ModelConfig& cfg) {
    if (cfg.instantaneous) return HistoryField();
    return HistoryField(cfg.grid, cfg.kernel, cfg.sgrid(), cfg.history.mode);
}

State make_state(const ModelConfig& cfg, SpectralField u0) {
    if (!u0.grid().same_as(*cfg.grid)) throw DimensionError("initial velocity on a different grid");
    return State{std::move(u0), make_history(cfg), 0.0};
}

ModelConfig instantaneous_limit(ModelConfig cfg) {
    cfg.instantaneous = true;
    return cfg;
}

}  // namespace nsv
