#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "retarget/kinematics.hpp"
#include "retarget/retarget_cost.hpp"

namespace retarget {

/// Damped-least-squares IK settings for geometric retargeting.
struct IkOptions {
  CostWeights weights;
  /// Maps reference keypoint names to model keypoint names. Empty = identity
  /// by name. Model keypoints without a mapped reference get zero weight.
  std::map<std::string, std::string> name_map;
  double damping = 1e-3;
  int max_iterations = 50;
  double residual_tolerance = 1e-8;
  int max_backtracks = 8;
  /// Quadratic penalty on keypoints below the ground plane.
  bool ground_penalty = true;
  double ground_penalty_weight = 10.0;
  /// Start of the first frame's optimization. Absent = mid-limit-range
  /// stance, which avoids the full-extension singularity of straight limbs.
  std::optional<Configuration> initial;
};

struct IkDiagnostics {
  std::vector<double> residuals;  // final objective value per frame
  std::vector<int> iterations;    // damped steps taken per frame
  std::vector<std::vector<double>> cost_trace;  // per frame, objective per iterate
};

/// Per-frame damped-least-squares IK on the combined keypoint cost, warm
/// started from the previous frame, joint limits clamped after every step.
/// Returns configurations only (zero velocities); deterministic. The frame
/// residual is non-increasing across iterations. Non-convergence is not an
/// error: the best iterate is returned and the residual recorded.
Trajectory geometric_retarget(const RobotModel& model, const KeypointTrajectory& x_ref,
                              const IkOptions& opts, IkDiagnostics* diagnostics = nullptr);

/// Resolves opts.name_map into per-model-keypoint reference columns:
/// result[k] = reference row index for model keypoint k, or -1 when unmapped.
/// Throws DimensionError when a mapped name is missing on either side.
std::vector<int> resolve_keypoint_map(const RobotModel& model,
                                      const std::vector<std::string>& reference_names,
                                      const std::map<std::string, std::string>& name_map);

}  // namespace retarget
