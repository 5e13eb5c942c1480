#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "retarget/dynamics.hpp"
#include "retarget/kinematics.hpp"
#include "retarget/retarget_cost.hpp"

namespace retarget {

/// Cross-entropy optimizer and receding-horizon settings.
struct CemConfig {
  int population = 64;
  int elites = 8;
  int iterations = 4;          // CEM iterations per replan
  double init_std = 2.0;       // per control channel; 2.0 torque, 0.3 target
  double std_floor = 0.05;
  double mean_smoothing = 1.0; // alpha in [0,1]; 1 = full elite update
  int knot_spacing = 4;        // control steps per spline knot
  int horizon = 25;            // control steps per replan window
  int replan_stride = 1;       // controls executed per replan
  std::uint64_t seed = 0;
  int workers = 0;             // evaluation threads; 0 = hardware concurrency
  double effort_weight = 1e-4; // control-effort regularizer in the objective
};

/// Per-call optimizer trace.
struct CemDiagnostics {
  std::vector<double> best_cost;       // best-so-far after each iteration
  std::vector<double> elite_mean_cost; // per iteration
  std::vector<double> std_norm;        // population std norm per iteration
  long evaluations = 0;
};

/// Per-replan planner trace.
struct PlanDiagnostics {
  std::vector<double> best_cost;        // per replan
  std::vector<double> elite_mean_cost;  // per replan, last iteration
  std::vector<double> std_norm;         // per replan, after refit
  std::vector<std::vector<double>> best_cost_curve;  // per replan per iteration
  double wall_time_s = 0.0;
  long total_rollouts = 0;
};

/// Number of spline knots covering a horizon of H control steps.
int knot_count(int horizon, int knot_spacing);

/// Piecewise-linear interpolation of K x n_q knots over H control steps;
/// exact at knot indices k * s.
MatX spline_to_controls(const MatX& knots, int horizon, int knot_spacing);

using CemObjective = std::function<double(const MatX& knots)>;

/// Minimizes a pure objective over knot matrices by the cross-entropy
/// method: diagonal Gaussian sampling, stable elite selection, smoothed
/// refit with a std floor, global best retained. Non-finite objective
/// values become +inf; an everywhere-invalid population is an error.
/// Deterministic for fixed (stream, config) regardless of worker count:
/// sample s of iteration i draws from its own RNG seeded by
/// splitmix64 chaining of (stream, i, s).
MatX cem_optimize(const CemObjective& objective, const MatX& init_mean,
                  const MatX& init_std, const CemConfig& cfg, std::uint64_t stream,
                  CemDiagnostics* diagnostics = nullptr);

struct PlanResult {
  Trajectory trajectory;     // T+1 states; state i+1 tracks target frame i
  ControlSequence controls;  // T executed controls
  PlanDiagnostics diagnostics;
};

/// Receding-horizon MPC tracking a keypoint trajectory: at each replan, CEM
/// optimizes spline knots whose objective is the combined task-space
/// distance between the forward kinematics of a rollout from the current
/// state and the target window (held-last-frame padded), plus a small
/// control-effort term; the first replan_stride controls are executed on the
/// persistent state and the mean is warm-started by re-evaluating its spline
/// shifted by the stride. The returned trajectory is an output of `rollout`
/// dynamics from q0 by construction.
PlanResult plan_receding_horizon(const RobotModel& model,
                                 const KeypointTrajectory& x_target,
                                 const Configuration& q0, const LaplacianMatrix& L,
                                 const CostWeights& weights, const CemConfig& cem,
                                 const DynamicsParams& dyn);

}  // namespace retarget
