#pragma once

#include <functional>
#include <vector>

#include "nsv/energy.hpp"
#include "nsv/model.hpp"

namespace nsv {

/// Output rows of a run. residual holds max |r_n| over the steps since the
/// previous row; dtu holds sum dt ||du/dt||_1^2 over the same steps.
struct Trajectory {
    double dt = 0.0;
    int stride = 1;
    std::vector<double> t;
    std::vector<EnergyReport> reports;
    std::vector<double> residual;
    std::vector<double> dtu;
    std::vector<SpectralField> snapshots;  // filled when requested

    std::vector<double> series(double EnergyReport::*field) const;
};

/// Implicit-midpoint stepper for one system. Memory and damping are handled
/// per mode; advection is evaluated at the midpoint by fixed-point iteration.
class Stepper {
public:
    Stepper(const ModelConfig& cfg, State s);

    void step();
    /// In Prony mode the lag grid is transported once per output window;
    /// these accessors bring it up to date first.
    const State& state() const {
        flush();
        return state_;
    }
    State& state() {
        flush();
        return state_;
    }
    /// u, t and the Prony moments are always current; the lag grid may lag.
    const State& peek() const { return state_; }
    void flush() const;
    const ModelConfig& config() const { return cfg_; }

    /// (u^n + u^{n+1})/2 of the last step.
    const SpectralField& midpoint() const { return ubar_; }
    /// ||u^{n+1} - u^n||_1^2 / dt of the last step.
    double last_dtu() const { return last_dtu_; }
    int last_iterations() const { return iterations_; }

    /// Linear companion step (the L and K systems): the advecting field is
    /// given, damping optional, extra forcing evaluated at the midpoint.
    void step_linear(const SpectralField& advect_bar, bool damping,
                     const std::function<SpectralField(const SpectralField& vbar)>& force);

private:
    SpectralField memory_explicit(double* gamma);
    void finish_memory(const SpectralField& ubar);
    SpectralField solve(const SpectralField& un, const SpectralField& R, double gamma, double beta,
                        const std::function<SpectralField(const SpectralField&)>& rhs_extra, const SpectralField& guess);

    ModelConfig cfg_;
    mutable State state_;
    mutable std::vector<SpectralField> pending_;
    SpectralField u_prev_;
    SpectralField ubar_;
    double last_dtu_ = 0.0;
    int iterations_ = 0;
    std::vector<double> ratio_;  // 1 / (1 + h_j / 2) per Prony term
};

struct SolveOptions {
    bool keep_snapshots = false;
    /// Called after every output row.
    std::function<void(const Stepper&)> observer;
};

Trajectory solve(const ModelConfig& cfg, const SpectralField& u0, const HistoryField& eta0,
                 const SolveOptions& opt = {});

/// Memory replaced by the instantaneous viscous term Au.
Trajectory solve_instantaneous(const ModelConfig& cfg, const SpectralField& u0, const SolveOptions& opt = {});

struct SplitResult {
    Trajectory S, L, K;
    std::vector<double> superposition;  // ||(L+K) - S||_H at the rows
    double scale = 0.0;                 // max ||S||_H
};

/// Co-evolves S, the undamped unforced L-system from U0, and the K-system
/// from zero driven by f - beta A^{-theta} v.
SplitResult solve_split(const ModelConfig& cfg, const State& U0);

/// ||U||_H^2 = ||u||^2 + alpha ||u||_1^2 + ||eta||_M^2 (lag-grid quadrature).
double h_norm_sq(const SpectralField& u, const HistoryField& eta, double alpha);
double h_distance(const State& a, const State& b, double alpha);

}  // namespace nsv
