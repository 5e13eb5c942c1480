#include "retarget/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace retarget {

namespace {

void check_same_grid(const ContactSequence& a, const ContactSequence& b) {
  if (a.T() != b.T() || a.n_groups() != b.n_groups())
    throw DimensionError("contact sequences have different shapes: " +
                         std::to_string(a.T()) + "x" + std::to_string(a.n_groups()) +
                         " vs " + std::to_string(b.T()) + "x" +
                         std::to_string(b.n_groups()));
}

AggregateValue aggregate(const std::vector<MetricsReport>& reports,
                         double MetricsReport::*field) {
  AggregateValue out;
  const int n = static_cast<int>(reports.size());
  if (n == 0) return out;
  for (const MetricsReport& r : reports) out.mean += r.*field;
  out.mean /= n;
  for (const MetricsReport& r : reports) {
    const double d = r.*field - out.mean;
    out.std += d * d;
  }
  out.std = std::sqrt(out.std / n);
  return out;
}

}  // namespace

double contact_error_rate(const ContactSequence& estimated,
                          const ContactSequence& truth) {
  check_same_grid(estimated, truth);
  const int cells = estimated.T() * estimated.n_groups();
  if (cells == 0) return 0.0;
  const int differing =
      static_cast<int>((estimated.flags != truth.flags).count());
  return static_cast<double>(differing) / cells;
}

bool success(const MatX3& pelvis, const MatX3& pelvis_ref, double threshold) {
  if (pelvis.rows() != pelvis_ref.rows())
    throw DimensionError("pelvis tracks have different lengths");
  for (int t = 0; t < pelvis.rows(); ++t)
    if ((pelvis.row(t) - pelvis_ref.row(t)).norm() > threshold) return false;
  return true;
}

TrackingErrors tracking_errors(const std::vector<Configuration>& Q,
                               const std::vector<Configuration>& Q_ref,
                               const KeypointTrajectory& x,
                               const KeypointTrajectory& x_ref,
                               const LaplacianMatrix& L) {
  const int T = static_cast<int>(Q.size());
  if (static_cast<int>(Q_ref.size()) != T || x.T() != T || x_ref.T() != T)
    throw DimensionError("trajectories have different lengths");
  if (T == 0) throw DimensionError("empty trajectory");
  if (x.m() != x_ref.m()) throw DimensionError("keypoint counts differ");

  TrackingErrors out;
  const int n = Q.front().n_q();
  double sq_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    if (Q[t].n_q() != n || Q_ref[t].n_q() != n)
      throw DimensionError("joint counts differ");
    sq_sum += (Q[t].joints - Q_ref[t].joints).squaredNorm();
  }
  out.joints_rmse = std::sqrt(sq_sum / (static_cast<double>(T) * n));

  const int m = x.m();
  double pos_sum = 0.0, lap_sum = 0.0;
  for (int t = 0; t < T; ++t) {
    for (int k = 0; k < m; ++k) {
      pos_sum += (x.frames[t].positions.row(k) - x_ref.frames[t].positions.row(k)).norm();
      lap_sum += per_keypoint_laplacian_error(x, x_ref, L, t, k);
    }
  }
  out.mean_position_error = pos_sum / (static_cast<double>(T) * m);
  out.mean_laplacian_error = lap_sum / (static_cast<double>(T) * m);
  return out;
}

double foot_slip(const RobotModel& model, const std::vector<Configuration>& qs,
                 const ContactSequence& contacts) {
  const int T = static_cast<int>(qs.size());
  if (contacts.T() != T)
    throw DimensionError("contact sequence length differs from trajectory");
  std::vector<std::vector<int>> group_points(contacts.n_groups());
  for (int g = 0; g < contacts.n_groups(); ++g) {
    group_points[g] = model.contact_group_points(contacts.groups[g]);
    if (group_points[g].empty())
      throw InvariantError("unknown contact group " + contacts.groups[g]);
  }

  MatX centroids_x(T, contacts.n_groups()), centroids_y(T, contacts.n_groups());
  for (int t = 0; t < T; ++t) {
    const std::vector<LinkPose> poses = link_poses(model, qs[t]);
    for (int g = 0; g < contacts.n_groups(); ++g) {
      Vec3 centroid = Vec3::Zero();
      for (int p : group_points[g]) centroid += contact_point_position(model, poses, p);
      centroid /= static_cast<double>(group_points[g].size());
      centroids_x(t, g) = centroid.x();
      centroids_y(t, g) = centroid.y();
    }
  }

  double slip = 0.0;
  for (int t = 1; t < T; ++t) {
    for (int g = 0; g < contacts.n_groups(); ++g) {
      if (!contacts.flags(t - 1, g) || !contacts.flags(t, g)) continue;
      const double dx = centroids_x(t, g) - centroids_x(t - 1, g);
      const double dy = centroids_y(t, g) - centroids_y(t - 1, g);
      slip += std::sqrt(dx * dx + dy * dy);
    }
  }
  return slip;
}

RewardBreakdown reward_terms(const RewardInputs& inputs, const RewardScales& scales) {
  const State& s = inputs.state;
  const State& r = inputs.ref_state;
  if (s.q.n_q() != r.q.n_q()) throw DimensionError("joint counts differ");
  if (s.v.size() != r.v.size()) throw DimensionError("velocity sizes differ");
  if (inputs.ee_positions.rows() != inputs.ee_ref_positions.rows())
    throw DimensionError("end-effector counts differ");
  if (inputs.action.size() != inputs.prev_action.size())
    throw DimensionError("action sizes differ");
  if (static_cast<int>(inputs.foot_xy_velocities.size()) !=
      inputs.foot_contact_forces.size())
    throw DimensionError("foot velocity and force counts differ");

  RewardBreakdown out;
  const int n = s.q.n_q();

  out.joint_position =
      scales.joint_pos_weight *
      std::exp(-(s.q.joints - r.q.joints).squaredNorm() /
               (scales.joint_pos_scale * scales.joint_pos_scale));
  out.joint_velocity =
      scales.joint_vel_weight *
      std::exp(-(s.v.tail(n) - r.v.tail(n)).squaredNorm() /
               (scales.joint_vel_scale * scales.joint_vel_scale));

  const double pos_err = (s.q.base_position - r.q.base_position).squaredNorm();
  const double angle =
      quat_log(s.q.base_orientation.conjugate() * r.q.base_orientation).norm();
  out.root_pose = scales.root_pose_weight *
                  std::exp(-(pos_err + scales.root_angle_coeff * angle * angle) /
                           (scales.root_pose_scale * scales.root_pose_scale));

  const double lin_err = (s.v.head(3) - r.v.head(3)).squaredNorm();
  const double ang_err = (s.v.segment(3, 3) - r.v.segment(3, 3)).squaredNorm();
  out.root_velocity = scales.root_vel_weight *
                      std::exp(-(lin_err + scales.root_angvel_coeff * ang_err) /
                               (scales.root_vel_scale * scales.root_vel_scale));

  out.end_effector =
      scales.ee_pos_weight *
      std::exp(-(inputs.ee_positions - inputs.ee_ref_positions).squaredNorm() /
               (scales.ee_pos_scale * scales.ee_pos_scale));

  out.joint_acceleration_penalty =
      -scales.joint_acc_weight * inputs.joint_accelerations.squaredNorm();
  out.torque_penalty = -scales.torque_weight * inputs.applied_torques.squaredNorm();
  out.action_rate_penalty =
      -scales.action_rate_weight * (inputs.action - inputs.prev_action).squaredNorm();
  out.joint_velocity_penalty =
      -scales.joint_vel_penalty_weight * s.v.tail(n).squaredNorm();

  double slip = 0.0;
  for (size_t i = 0; i < inputs.foot_xy_velocities.size(); ++i) {
    if (inputs.foot_contact_forces[static_cast<int>(i)] >
        scales.contact_force_threshold)
      slip += inputs.foot_xy_velocities[i].norm();
  }
  out.foot_slip_penalty = -scales.foot_slip_weight * slip;

  out.total = out.joint_position + out.joint_velocity + out.root_pose +
              out.root_velocity + out.end_effector + out.joint_acceleration_penalty +
              out.torque_penalty + out.action_rate_penalty +
              out.joint_velocity_penalty + out.foot_slip_penalty;
  return out;
}

AggregateReport aggregate_seeds(const std::vector<MetricsReport>& reports) {
  AggregateReport out;
  out.count = static_cast<int>(reports.size());
  out.contact_error_rate = aggregate(reports, &MetricsReport::contact_error_rate);
  out.joints_rmse = aggregate(reports, &MetricsReport::joints_rmse);
  out.mean_position_error = aggregate(reports, &MetricsReport::mean_position_error);
  out.mean_laplacian_error = aggregate(reports, &MetricsReport::mean_laplacian_error);
  out.foot_slip = aggregate(reports, &MetricsReport::foot_slip);
  if (out.count > 0) {
    int successes = 0;
    for (const MetricsReport& r : reports) successes += r.success ? 1 : 0;
    out.success_rate = static_cast<double>(successes) / out.count;
  }
  return out;
}

}  // namespace retarget
