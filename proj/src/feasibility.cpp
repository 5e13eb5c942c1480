#include "retarget/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "retarget/dynamics.hpp"
#include "retarget/kinematics.hpp"
#include "retarget/qp.hpp"

namespace retarget {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Tikhonov weight on the decision variables; makes the force distribution
// unique without shifting the residual beyond ~1e-8 * ||x||.
constexpr double kReg = 1e-8;

}  // namespace

double resolved_eps_dyn(const RobotModel& model, const FeasibilityTolerances& tol) {
  if (tol.eps_dyn > 0.0) return tol.eps_dyn;
  return 1e-2 * model.total_mass() * model.gravity.norm();
}

ContactSequence estimate_contacts(const RobotModel& model,
                                  const std::vector<Configuration>& qs, double dt,
                                  double threshold) {
  ContactSequence seq;
  seq.dt = dt;
  seq.groups = model.contact_groups();
  const int T = static_cast<int>(qs.size());
  const int n_groups = static_cast<int>(seq.groups.size());
  seq.flags.resize(T, n_groups);
  std::vector<std::vector<int>> group_points(n_groups);
  for (int g = 0; g < n_groups; ++g)
    group_points[g] = model.contact_group_points(seq.groups[g]);
  for (int t = 0; t < T; ++t) {
    const std::vector<LinkPose> poses = link_poses(model, qs[t]);
    for (int g = 0; g < n_groups; ++g) {
      double lowest = kInf;
      for (int p : group_points[g])
        lowest = std::min(lowest, contact_point_position(model, poses, p).z());
      seq.flags(t, g) = lowest < threshold;
    }
  }
  return seq;
}

FeasibilityVerdict check_timestep_feasibility(const RobotModel& model,
                                              const Configuration& q, const VecX& v,
                                              const VecX& a,
                                              const std::vector<int>& active_points,
                                              const FeasibilityTolerances& tol) {
  const int n = model.num_joints();
  const int nv = model.nv();
  if (q.n_q() != n)
    throw DimensionError("configuration has " + std::to_string(q.n_q()) +
                         " joints, model has " + std::to_string(n));
  if (v.size() != nv || a.size() != nv)
    throw DimensionError("velocity and acceleration must have size " +
                         std::to_string(nv));
  for (int p : active_points)
    if (p < 0 || p >= static_cast<int>(model.contact_points.size()))
      throw InvariantError("active contact point index " + std::to_string(p) +
                           " out of range");

  const int nc = static_cast<int>(active_points.size());
  const int nx = n + 3 * nc;
  const VecX demand = mass_matrix(model, q) * a + nonlinear_bias(model, q, v);

  MatX B = MatX::Zero(nv, nx);
  B.block(6, 0, n, n).setIdentity();
  for (int i = 0; i < nc; ++i)
    B.block(0, n + 3 * i, nv, 3) =
        contact_point_jacobian(model, q, active_points[i]).transpose();

  const int row0 = tol.anchored_base ? 6 : 0;
  const int rows = nv - row0;
  const MatX Br = B.bottomRows(rows);
  const VecX dr = demand.tail(rows);

  QpProblem prob;
  prob.P = 2.0 * (Br.transpose() * Br) + kReg * MatX::Identity(nx, nx);
  prob.q = -2.0 * Br.transpose() * dr;
  prob.lb = VecX::Constant(nx, -kInf);
  prob.ub = VecX::Constant(nx, kInf);
  for (int j = 0; j < n; ++j) {
    prob.lb[j] = -model.joint_limits[j].torque;
    prob.ub[j] = model.joint_limits[j].torque;
  }
  for (int i = 0; i < nc; ++i) prob.lb[n + 3 * i + 2] = 0.0;
  const double mu = model.friction;
  prob.G = MatX::Zero(4 * nc, nx);
  prob.h = VecX::Zero(4 * nc);
  for (int i = 0; i < nc; ++i) {
    for (int s = 0; s < 4; ++s) {
      const int axis = s / 2;
      const double sign = (s % 2 == 0) ? 1.0 : -1.0;
      prob.G(4 * i + s, n + 3 * i + axis) = sign;
      prob.G(4 * i + s, n + 3 * i + 2) = -mu;
    }
  }

  const QpSolution sol = solve_qp(prob);
  const double eps = resolved_eps_dyn(model, tol);

  FeasibilityVerdict verdict;
  verdict.residual = (dr - Br * sol.x).norm();
  verdict.indeterminate = sol.status != QpStatus::Converged;
  VecX x = sol.x;
  if (verdict.indeterminate) {
    // A stalled solve can still certify the timestep: project the iterate
    // into the constraint set (rows are independent per joint and per
    // contact point) and accept it if the residual stays within eps.
    VecX xp = sol.x;
    for (int j = 0; j < n; ++j)
      xp[j] = std::clamp(xp[j], -model.joint_limits[j].torque,
                         model.joint_limits[j].torque);
    for (int i = 0; i < nc; ++i) {
      const int c = n + 3 * i;
      xp[c + 2] = std::max(xp[c + 2], 0.0);
      const double cap = mu * xp[c + 2];
      xp[c + 0] = std::clamp(xp[c + 0], -cap, cap);
      xp[c + 1] = std::clamp(xp[c + 1], -cap, cap);
    }
    const double projected = (dr - Br * xp).norm();
    if (projected <= eps) {
      verdict.indeterminate = false;
      verdict.residual = projected;
      x = xp;
    }
  }
  verdict.feasible = !verdict.indeterminate && verdict.residual <= eps;
  verdict.torque_margin = kInf;
  for (int j = 0; j < n; ++j)
    verdict.torque_margin = std::min(verdict.torque_margin,
                                     model.joint_limits[j].torque - std::abs(x[j]));
  verdict.cone_margin = kInf;
  for (int i = 0; i < nc; ++i) {
    const Vec3 lambda = x.segment<3>(n + 3 * i);
    verdict.cone_margin = std::min(verdict.cone_margin, lambda.z());
    verdict.cone_margin =
        std::min(verdict.cone_margin, mu * lambda.z() - std::abs(lambda.x()));
    verdict.cone_margin =
        std::min(verdict.cone_margin, mu * lambda.z() - std::abs(lambda.y()));
  }
  return verdict;
}

FeasibilityReport check_trajectory_feasibility(const RobotModel& model,
                                               const std::vector<Configuration>& qs,
                                               double dt, double contact_threshold,
                                               const FeasibilityTolerances& tol) {
  const TrajectoryDerivatives der = finite_difference_derivatives(qs, dt);
  const ContactSequence contacts = estimate_contacts(model, qs, dt, contact_threshold);
  std::vector<std::vector<int>> group_points(contacts.n_groups());
  for (int g = 0; g < contacts.n_groups(); ++g)
    group_points[g] = model.contact_group_points(contacts.groups[g]);

  FeasibilityReport report;
  const int T = static_cast<int>(qs.size());
  report.verdicts.reserve(T);
  int infeasible = 0;
  for (int t = 0; t < T; ++t) {
    std::vector<int> active;
    for (int g = 0; g < contacts.n_groups(); ++g)
      if (contacts.flags(t, g))
        active.insert(active.end(), group_points[g].begin(), group_points[g].end());
    FeasibilityVerdict verdict =
        check_timestep_feasibility(model, qs[t], der.velocities.row(t).transpose(),
                                   der.accelerations.row(t).transpose(), active, tol);
    if (!verdict.feasible) ++infeasible;
    if (verdict.indeterminate) ++report.indeterminate_count;
    if (report.worst_timestep < 0 || verdict.residual > report.worst_residual) {
      report.worst_residual = verdict.residual;
      report.worst_timestep = t;
    }
    report.verdicts.push_back(verdict);
  }
  report.infeasible_fraction = T > 0 ? static_cast<double>(infeasible) / T : 0.0;
  return report;
}

}  // namespace retarget
