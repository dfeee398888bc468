#pragma once

// Pass/fail thresholds of the scenario criteria. These are regression
// baselines, not constants of the model; bump kVersion when one changes.

namespace nsv::thresholds {

inline constexpr const char* kVersion = "2026.10-1";

// energy_equality: max balance residual ratio under dt-halving
inline constexpr double kResidualRatioLo = 3.4;
inline constexpr double kResidualRatioHi = 4.6;

// monotone_decay: E(t_{n+1}) <= E(t_n) + slack * E(0)
inline constexpr double kMonotoneSlack = 1e-12;

// decay_damped / decay_undamped, fitted on [kDecayWindowA, kDecayWindowB]
inline constexpr double kDecayWindowA = 2.0;
inline constexpr double kDecayWindowB = 15.0;
inline constexpr double kDampedOmega = 0.01;
inline constexpr double kDampedR2 = 0.98;
inline constexpr double kUndampedOmega = 0.0;
inline constexpr double kUndampedR2 = 0.95;

// absorbing_ball: two initial levels kAbsorbLevelRatio apart
inline constexpr double kAbsorbLevelRatio = 16.0;
inline constexpr double kAbsorbCeilingTol = 0.10;
inline constexpr double kAbsorbHorizon = 50.0;

// dtu_budget: max of budget/(1+t) on the second half over the first half
inline constexpr double kBudgetGrowth = 1.5;

// continuous_dependence
inline constexpr double kContinuityPerturbation = 1e-6;
inline constexpr double kContinuityHorizon = 10.0;
inline constexpr double kContinuityKTol = 0.20;

// history_fidelity: error <= factor * (ds_min + dt) * path scale
inline constexpr double kRepFactor = 5.0;
inline constexpr int kRepSteps = 200;

// dual_memory
inline constexpr double kDualMemoryTol = 1e-3;
inline constexpr int kDualMemorySteps = 100;

// structural_identities
inline constexpr double kStructuralTol = 1e-12;
inline constexpr int kStructuralTrials = 100;
inline constexpr double kLambdaEps = 1e-2;

// splitting
inline constexpr double kSuperpositionTol = 1e-8;
inline constexpr double kSplitBoundFrom = 5.0;
inline constexpr double kSplitGrowth = 2.0;

// singular_limit
inline constexpr double kRescaleTime = 5.0;

}  // namespace nsv::thresholds
