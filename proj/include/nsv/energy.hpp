#pragma once

#include <utility>
#include <vector>

#include "nsv/model.hpp"

namespace nsv {

struct EnergyReport {
    double t = 0.0;
    double E = 0.0, E1 = 0.0;
    double Pi = 0.0, Pi1 = 0.0;
    double Phi = 0.0, Phi1 = 0.0;
    double Psi = 0.0, Psi1 = 0.0;
    double Lambda_eps = 0.0, Lambda1 = 0.0;
    double norm_u_minus_theta = 0.0, norm_u_0 = 0.0, norm_u_1 = 0.0, norm_u_2 = 0.0;
    // not in the CSV
    double memory = 0.0;         // ||eta||_M^2
    double damping = 0.0;        // beta ||u||_{-theta}^2
    double forcing_power = 0.0;  // <f, u>
    double eps = 0.0;
};

/// nu = min(alpha kappa delta / 32, 1)
double nu0(const ModelConfig& cfg, double kappa, double delta);
/// nu_1 = min(alpha kappa delta / 72, 1)
double nu1(const ModelConfig& cfg, double kappa, double delta);

EnergyReport report(const State& s, const ModelConfig& cfg, double eps);

/// The terms of the energy equality only, without the lag-grid functionals Phi.
struct BalanceTerms {
    double E, Pi, damping, forcing_power;
};
BalanceTerms balance_terms(const State& s, const ModelConfig& cfg);

/// Sufficient eps bound for 1/2 E <= Lambda_eps <= 2 E and the order-1 analogue.
double epsilon_max(const ModelConfig& cfg, double kappa, double delta);

struct Trajectory;

struct ResidualSeries {
    std::vector<double> r;
    double max_abs = 0.0;
};

/// r_n = (E_{n+1} - E_n)/dt + trapezoidal averages of beta||u||_{-theta}^2 + Pi - <f,u>.
/// Needs a stride-1 trajectory.
ResidualSeries balance_residual(const Trajectory& traj, const ModelConfig& cfg);

struct DecayFit {
    double omega = 0.0;
    double r2 = 0.0;
    std::size_t samples = 0;
};

/// Least-squares slope of log E on [t_a, t_b]; omega = -slope.
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& E, double t_a, double t_b);

/// Running sum of dt ||(u_{n+1} - u_n)/dt||_1^2 at the trajectory rows.
std::vector<double> dtu_budget(const Trajectory& traj);

}  // namespace nsv
