#pragma once

#include <vector>

#include "retarget/model.hpp"
#include "retarget/state.hpp"

namespace retarget {

/// Compliant (penalty) ground-contact parameters; flat ground only.
struct ContactModelParams {
  double stiffness = 2e4;                // N/m, > 0
  double damping = 500.0;                // N*s/m, >= 0
  double ground_height = 0.0;            // m
  double friction = 0.8;                 // mu, copied from the model
  double regularization_velocity = 0.05; // m/s, > 0
};

ContactModelParams default_contact_params(const RobotModel& model);

enum class ControlMode {
  Torque,    // u is joint torques, N*m
  PdTarget,  // u is joint position targets; tau = kp*(u - q) - kd*qdot
};

/// Stepping and rollout settings. The applied joint torque is clamped to the
/// model limits in either mode.
struct DynamicsParams {
  ContactModelParams contact;
  ControlMode mode = ControlMode::Torque;
  double kp = 25.0;  // N*m/rad, PD mode
  double kd = 0.8;   // N*m*s/rad, PD mode
  int substeps = 10; // physics dt = control dt / substeps
};

DynamicsParams default_dynamics_params(const RobotModel& model);

/// Contact force acting at one model contact point, world frame.
struct ContactForce {
  int point = 0;
  Vec3 force = Vec3::Zero();
};

/// Joint-space mass matrix, (6+n_q)^2, symmetric positive definite, in the
/// State velocity convention. Composite-rigid-body algorithm.
MatX mass_matrix(const RobotModel& model, const Configuration& q);

/// Recursive Newton-Euler inverse dynamics: the generalized force producing
/// acceleration `a` at (q, v) under gravity and the given external contact
/// forces. Rows 0:6 are the unactuated base wrench (world-frame force, then
/// body-frame torque), rows 6: are joint torques.
VecX inverse_dynamics(const RobotModel& model, const Configuration& q, const VecX& v,
                      const VecX& a, const std::vector<ContactForce>& contacts = {});

/// inverse_dynamics at zero acceleration: Coriolis, centrifugal and gravity
/// terms.
VecX nonlinear_bias(const RobotModel& model, const Configuration& q, const VecX& v);

/// Compliant contact forces for the current state: normal spring-damper
/// clamped non-negative, Coulomb friction with tangential regularization.
std::vector<ContactForce> contact_forces(const RobotModel& model, const State& s,
                                         const ContactModelParams& contact);

/// One semi-implicit Euler step of duration dt (the physics step). Torques
/// clamped to limits; joint velocities clamped to the model velocity limits;
/// joint positions clamped to limits with velocity zeroed against the limit;
/// quaternion integrated via the exponential map. The
/// contact normal force (spring and damper, first order in the depth change)
/// and the regularized friction slope are integrated implicitly, since they
/// are stiffer than the explicit stability bound at the default gains;
/// points whose implicit normal force would pull are released. Throws
/// DynamicsError naming the first non-finite quantity.
State step(const RobotModel& model, const State& s, const VecX& u, double dt,
           const DynamicsParams& params);

/// Integrates U from (q0, v=0): state i+1 = params.substeps steps holding
/// u_i. Returns T+1 states. Bit-deterministic for identical inputs.
Trajectory rollout(const RobotModel& model, const Configuration& q0,
                   const ControlSequence& U, const DynamicsParams& params);

/// Rollout continuation from an arbitrary state (nonzero velocity allowed).
Trajectory rollout_from(const RobotModel& model, const State& s0,
                        const ControlSequence& U, const DynamicsParams& params);

/// Generalized velocities and accelerations of a configuration sequence by
/// central differences (one-sided at the ends); base orientation via the
/// quaternion logarithm (body-frame angular velocity). Requires T >= 3.
struct TrajectoryDerivatives {
  MatX velocities;     // T x (6+n_q)
  MatX accelerations;  // T x (6+n_q)
};

TrajectoryDerivatives finite_difference_derivatives(const std::vector<Configuration>& qs,
                                                    double dt);

/// Kinetic plus gravitational potential energy; the contact-free drift bound
/// tested on the integrator.
double total_energy(const RobotModel& model, const State& s);

}  // namespace retarget
