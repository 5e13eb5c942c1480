#pragma once

#include <vector>

#include "retarget/model.hpp"
#include "retarget/types.hpp"

namespace retarget {

/// Floating-base configuration q: base pose in SE(3) plus joint angles.
struct Configuration {
  Vec3 base_position = Vec3::Zero();      // world, m
  Quat base_orientation = Quat::Identity();  // unit within 1e-9
  VecX joints;                            // n_q, rad

  int n_q() const { return static_cast<int>(joints.size()); }
};

/// Configuration plus generalized velocity. Velocity layout (6 + n_q):
///   v[0:3] base linear velocity, world frame, m/s
///   v[3:6] base angular velocity, body frame, rad/s
///   v[6:]  joint velocities, rad/s
struct State {
  Configuration q;
  VecX v;
};

/// State sequence over T control steps: T+1 states including the initial one,
/// uniformly spaced by dt seconds.
struct Trajectory {
  std::vector<State> states;
  double dt = 0.0;

  int T() const { return static_cast<int>(states.size()) - 1; }
};

/// Joint control sequence, one row per control step. Rows are torques (N*m)
/// or PD position targets (rad) depending on the control mode in use.
struct ControlSequence {
  MatX controls;  // T x n_q
  double dt = 0.0;

  int T() const { return static_cast<int>(controls.rows()); }
};

/// Quaternion exponential of a rotation vector and its inverse. quat_log
/// returns the rotation vector of the quaternion closest to identity.
Quat quat_exp(const Vec3& w);
Vec3 quat_log(const Quat& q);

/// Integrates a configuration along a generalized velocity for dt seconds:
/// base position by world linear velocity, base orientation by right
/// multiplication with quat_exp(dt * body angular velocity), joints linearly.
Configuration integrate(const Configuration& q, const VecX& v, double dt);

/// Configuration with zero joints and identity base pose.
Configuration zero_configuration(const RobotModel& model);

/// Extracts the configuration sequence of a trajectory.
std::vector<Configuration> configurations(const Trajectory& trajectory);

/// Checks Configuration invariants (unit quaternion within 1e-9, finite and
/// correctly sized joint vector); throws InvariantError or DimensionError.
void check_configuration(const RobotModel& model, const Configuration& q);

}  // namespace retarget
