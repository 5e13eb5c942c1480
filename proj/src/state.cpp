#include "retarget/state.hpp"

#include <cmath>

namespace retarget {

Quat quat_exp(const Vec3& w) {
  const double angle = w.norm();
  if (angle < 1e-12) {
    Quat q(1.0, 0.5 * w.x(), 0.5 * w.y(), 0.5 * w.z());
    q.normalize();
    return q;
  }
  const Vec3 axis = w / angle;
  return Quat(Eigen::AngleAxisd(angle, axis));
}

Vec3 quat_log(const Quat& q) {
  Quat u = q.normalized();
  if (u.w() < 0.0) u.coeffs() = -u.coeffs();
  const double vec_norm = u.vec().norm();
  if (vec_norm < 1e-12) return 2.0 * u.vec();
  const double angle = 2.0 * std::atan2(vec_norm, u.w());
  return (angle / vec_norm) * u.vec();
}

Configuration integrate(const Configuration& q, const VecX& v, double dt) {
  Configuration out = q;
  out.base_position += dt * v.head<3>();
  out.base_orientation = (q.base_orientation * quat_exp(dt * v.segment<3>(3))).normalized();
  out.joints += dt * v.tail(v.size() - 6);
  return out;
}

Configuration zero_configuration(const RobotModel& model) {
  Configuration q;
  q.joints = VecX::Zero(model.num_joints());
  return q;
}

std::vector<Configuration> configurations(const Trajectory& trajectory) {
  std::vector<Configuration> qs;
  qs.reserve(trajectory.states.size());
  for (const State& s : trajectory.states) qs.push_back(s.q);
  return qs;
}

void check_configuration(const RobotModel& model, const Configuration& q) {
  if (q.n_q() != model.num_joints()) {
    throw DimensionError("configuration has " + std::to_string(q.n_q()) +
                         " joints, model expects " + std::to_string(model.num_joints()));
  }
  if (std::abs(q.base_orientation.norm() - 1.0) > 1e-9) {
    throw InvariantError("base orientation quaternion is not unit norm");
  }
  if (!q.base_position.allFinite() || !q.joints.allFinite()) {
    throw InvariantError("configuration contains non-finite values");
  }
}

}  // namespace retarget
