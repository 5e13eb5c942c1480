#pragma once

#include <string>
#include <vector>

#include "retarget/model.hpp"
#include "retarget/state.hpp"

namespace retarget {

/// Per-timestep, per-contact-group boolean contact flags.
struct ContactSequence {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> flags;  // T x n_groups
  double dt = 0.0;
  std::vector<std::string> groups;

  int T() const { return static_cast<int>(flags.rows()); }
  int n_groups() const { return static_cast<int>(flags.cols()); }
};

struct FeasibilityTolerances {
  /// Dynamics residual bound, N; non-positive = auto (1e-2 * total weight).
  double eps_dyn = 0.0;
  /// Drop the 6 unactuated base rows; for anchored test mechanisms only.
  bool anchored_base = false;
};

double resolved_eps_dyn(const RobotModel& model, const FeasibilityTolerances& tol);

/// Verdict of the per-timestep torque/contact-force existence check.
/// For determinate verdicts: feasible iff residual <= eps_dyn. Indeterminate
/// verdicts (QP did not converge) are never feasible and are counted as
/// infeasible in reports, flagged separately.
struct FeasibilityVerdict {
  bool feasible = false;
  bool indeterminate = false;
  double residual = 0.0;       // N, norm of unmet dynamics
  double torque_margin = 0.0;  // min over joints of tau_max - |tau|
  double cone_margin = 0.0;    // min slack of normal/pyramid rows
};

struct FeasibilityReport {
  std::vector<FeasibilityVerdict> verdicts;
  double infeasible_fraction = 0.0;
  double worst_residual = 0.0;
  int worst_timestep = -1;
  int indeterminate_count = 0;
};

/// Contact estimation by the height rule: a group is in contact at a frame
/// iff the lowest of its contact points is below `threshold` above ground.
ContactSequence estimate_contacts(const RobotModel& model,
                                  const std::vector<Configuration>& qs, double dt,
                                  double threshold = 0.02);

/// Existence check at one timestep: minimizes the dynamics residual
/// || M(q) a + bias(q, v) - S' tau - sum J_c' lambda_c || over torques within
/// limits and contact forces in the 4-sided friction pyramid at the active
/// contact points. Rigid-contact formulation, independent of the rollout
/// contact model.
FeasibilityVerdict check_timestep_feasibility(const RobotModel& model,
                                              const Configuration& q, const VecX& v,
                                              const VecX& a,
                                              const std::vector<int>& active_points,
                                              const FeasibilityTolerances& tol = {});

/// Full-trajectory check: finite-difference derivatives, contact estimation,
/// then per-timestep verdicts. Active points at a frame are all points of the
/// groups flagged in contact. Requires T >= 3.
FeasibilityReport check_trajectory_feasibility(const RobotModel& model,
                                               const std::vector<Configuration>& qs,
                                               double dt, double contact_threshold = 0.02,
                                               const FeasibilityTolerances& tol = {});

}  // namespace retarget
