#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "retarget/dynamics.hpp"
#include "retarget/kinematics.hpp"
#include "retarget/model.hpp"
#include "retarget/state.hpp"

using namespace retarget;

namespace {

RobotModel box_model(double mass, const Vec3& half, bool with_corners) {
  RobotModel m;
  m.name = "box";
  Link base;
  base.name = "base";
  base.parent = -1;
  base.mass = mass;
  base.inertia = (mass / 3.0) *
                 Vec3(half.y() * half.y() + half.z() * half.z(),
                      half.x() * half.x() + half.z() * half.z(),
                      half.x() * half.x() + half.y() * half.y())
                     .asDiagonal();
  m.links = {base};
  if (with_corners) {
    int idx = 0;
    for (double sx : {-1.0, 1.0}) {
      for (double sy : {-1.0, 1.0}) {
        ContactPoint cp;
        cp.name = "corner_" + std::to_string(idx++);
        cp.link = 0;
        cp.offset = Vec3(sx * half.x(), sy * half.y(), -half.z());
        cp.group = "base";
        m.contact_points.push_back(cp);
      }
    }
  }
  return m;
}

RobotModel pendulum_model(double mass = 0.8, double com_dist = 0.6,
                          double torque_limit = 100.0) {
  RobotModel m;
  m.name = "pendulum";
  Link base;
  base.name = "base";
  base.parent = -1;
  base.mass = 1.0;
  base.inertia = 1e-2 * Mat3::Identity();
  Link arm;
  arm.name = "arm";
  arm.parent = 0;
  arm.joint_axis = Vec3::UnitY();
  arm.mass = mass;
  arm.com = Vec3(0, 0, -com_dist);
  arm.inertia = 1e-3 * Mat3::Identity();
  m.links = {base, arm};
  m.joint_limits = {{-3.0, 3.0, 50.0, torque_limit}};
  return m;
}

struct Rng {
  std::mt19937_64 gen;
  explicit Rng(uint64_t seed) : gen(seed) {}
  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
  Vec3 vec3(double scale) {
    return Vec3(uniform(-scale, scale), uniform(-scale, scale), uniform(-scale, scale));
  }
  Quat quat() {
    std::normal_distribution<double> n;
    Quat q(n(gen), n(gen), n(gen), n(gen));
    q.normalize();
    return q;
  }
  Configuration configuration(const RobotModel& model) {
    Configuration q;
    q.base_position = vec3(0.5) + Vec3(0, 0, 2.0);
    q.base_orientation = quat();
    q.joints.resize(model.num_joints());
    for (int j = 0; j < model.num_joints(); ++j) {
      const auto& lim = model.joint_limits[j];
      const double mid = 0.5 * (lim.lower + lim.upper);
      const double span = 0.5 * (lim.upper - lim.lower);
      q.joints[j] = mid + 0.9 * span * uniform(-1.0, 1.0);
    }
    return q;
  }
  VecX vector(int n, double scale) {
    VecX v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(-scale, scale);
    return v;
  }
};

}  // namespace

TEST_CASE("static pendulum joint torque equals gravity moment") {
  const double mass = 0.8, com_dist = 0.6;
  const RobotModel model = pendulum_model(mass, com_dist);
  for (double theta : {0.0, 0.3, 0.7, M_PI / 2, -0.7}) {
    Configuration q = zero_configuration(model);
    q.joints[0] = theta;
    const VecX tau = inverse_dynamics(model, q, VecX::Zero(7), VecX::Zero(7));
    CHECK(tau[6] == doctest::Approx(mass * 9.81 * com_dist * std::sin(theta))
                        .epsilon(1e-12));
  }
}

TEST_CASE("free fall requires no generalized force") {
  const RobotModel model = models::mini_humanoid();
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Configuration q = rng.configuration(model);
    VecX a = VecX::Zero(model.nv());
    a.head<3>() = model.gravity;
    const VecX tau = inverse_dynamics(model, q, VecX::Zero(model.nv()), a);
    CHECK(tau.lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("forward then inverse dynamics recovers the input force") {
  const RobotModel model = models::mini_humanoid();
  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const Configuration q = rng.configuration(model);
    const VecX v = rng.vector(model.nv(), 1.0);
    const VecX tau = rng.vector(model.nv(), 5.0);
    const MatX M = mass_matrix(model, q);
    const VecX a = M.ldlt().solve(tau - nonlinear_bias(model, q, v));
    const VecX recovered = inverse_dynamics(model, q, v, a);
    const double scale = std::max(1.0, tau.norm());
    CHECK((recovered - tau).norm() / scale < 1e-6);
  }
}

TEST_CASE("mass matrix is symmetric positive definite") {
  Rng rng(3);
  for (const RobotModel& model : {models::planar_biped(), models::mini_humanoid()}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Configuration q = rng.configuration(model);
      const MatX M = mass_matrix(model, q);
      CHECK((M - M.transpose()).lpNorm<Eigen::Infinity>() < 1e-9);
      Eigen::SelfAdjointEigenSolver<MatX> es(M);
      CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
  }
}

TEST_CASE("mass matrix of a single rigid body has the hand-derived blocks") {
  Rng rng(7);
  const Vec3 half(0.1, 0.1, 0.05);

  SUBCASE("centered body") {
    const RobotModel model = box_model(1.7, half, false);
    Configuration q = zero_configuration(model);
    q.base_orientation = rng.quat();
    const MatX M = mass_matrix(model, q);
    CHECK((M.block<3, 3>(0, 0) - 1.7 * Mat3::Identity()).norm() < 1e-12);
    // angular velocity is body-frame, so the rotational block is the body
    // inertia regardless of orientation
    CHECK((M.block<3, 3>(3, 3) - model.links[0].inertia).norm() < 1e-12);
    CHECK(M.block<3, 3>(0, 3).norm() < 1e-12);
    CHECK(M.block<3, 3>(3, 0).norm() < 1e-12);
  }

  SUBCASE("displaced center of mass couples the blocks") {
    RobotModel model = box_model(2.0, half, false);
    model.links[0].com = Vec3(0.03, -0.01, 0.02);
    Configuration q = zero_configuration(model);
    q.base_orientation = rng.quat();
    const Mat3 R = q.base_orientation.toRotationMatrix();
    const Mat3 cx = skew(model.links[0].com);
    const Mat3 hx = 2.0 * cx;
    const MatX M = mass_matrix(model, q);
    CHECK((M.block<3, 3>(0, 3) - (-R * hx)).norm() < 1e-12);
    CHECK((M.block<3, 3>(3, 0) - hx * R.transpose()).norm() < 1e-12);
    CHECK((M.block<3, 3>(3, 3) - (model.links[0].inertia - 2.0 * cx * cx)).norm() <
          1e-12);
  }
}

TEST_CASE("inverse dynamics is affine in acceleration with slope M") {
  const RobotModel model = models::mini_humanoid();
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Configuration q = rng.configuration(model);
    const VecX v = rng.vector(model.nv(), 1.0);
    const VecX a = rng.vector(model.nv(), 3.0);
    const VecX lhs = inverse_dynamics(model, q, v, a) - inverse_dynamics(model, q, v,
                                                                         VecX::Zero(model.nv()));
    const VecX rhs = mass_matrix(model, q) * a;
    CHECK((lhs - rhs).lpNorm<Eigen::Infinity>() < 1e-8);
  }
}

TEST_CASE("contact forces enter the dynamics through the contact Jacobian") {
  const RobotModel model = models::mini_humanoid();
  Rng rng(53);
  for (int trial = 0; trial < 10; ++trial) {
    const Configuration q = rng.configuration(model);
    const VecX v = rng.vector(model.nv(), 1.0);
    const VecX a = rng.vector(model.nv(), 2.0);
    const int point = trial % static_cast<int>(model.contact_points.size());
    const Vec3 force = rng.vec3(30.0);
    const VecX with = inverse_dynamics(model, q, v, a, {{point, force}});
    const VecX without = inverse_dynamics(model, q, v, a);
    const MatX Jc = contact_point_jacobian(model, q, point);
    const VecX expected = without - Jc.transpose() * force;
    CHECK((with - expected).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("ballistic drop matches constant-acceleration kinematics") {
  const RobotModel model = box_model(1.0, Vec3(0.1, 0.1, 0.05), true);
  Configuration q0 = zero_configuration(model);
  q0.base_position = Vec3(0, 0, 1.0);
  State s0{q0, VecX::Zero(6)};
  s0.v[0] = 0.3;
  ControlSequence U;
  U.controls = MatX::Zero(100, 0);
  U.dt = 0.002;
  DynamicsParams params = default_dynamics_params(model);
  params.substeps = 1;
  const Trajectory traj = rollout_from(model, s0, U, params);
  const double t = 0.2;
  const double drop = 1.0 - traj.states.back().q.base_position.z();
  CHECK(drop == doctest::Approx(0.5 * 9.81 * t * t).epsilon(0.02));
  CHECK(traj.states.back().q.base_position.x() == doctest::Approx(0.06).epsilon(1e-9));
  CHECK(traj.states.back().v[2] == doctest::Approx(-9.81 * t).epsilon(1e-9));
}

TEST_CASE("box at penetration equilibrium stays at rest") {
  const RobotModel model = box_model(1.0, Vec3(0.1, 0.1, 0.05), true);
  const double depth = 1.0 * 9.81 / (4.0 * 2e4);
  Configuration q0 = zero_configuration(model);
  q0.base_position = Vec3(0, 0, 0.05 - depth);
  ControlSequence U;
  U.controls = MatX::Zero(100, 0);
  U.dt = 0.01;
  DynamicsParams params = default_dynamics_params(model);
  params.substeps = 5;
  const Trajectory traj = rollout(model, q0, U, params);
  for (const State& s : traj.states) {
    CHECK(s.v.head<3>().norm() < 1e-3);
    CHECK(s.v.segment<3>(3).norm() < 1e-3);
  }
  CHECK(traj.states.back().q.base_position.z() ==
        doctest::Approx(0.05 - depth).epsilon(1e-4));
}

TEST_CASE("zero gravity and zero input is a fixed point") {
  RobotModel model = box_model(1.0, Vec3(0.1, 0.1, 0.05), true);
  model.gravity = Vec3::Zero();
  Configuration q0 = zero_configuration(model);
  q0.base_position = Vec3(0.2, -0.1, 3.0);
  ControlSequence U;
  U.controls = MatX::Zero(50, 0);
  U.dt = 0.01;
  const Trajectory traj = rollout(model, q0, U, default_dynamics_params(model));
  const State& last = traj.states.back();
  CHECK(last.q.base_position == q0.base_position);
  CHECK(last.q.base_orientation.coeffs() == q0.base_orientation.coeffs());
  CHECK(last.v.norm() == 0.0);
}

TEST_CASE("rollout is deterministic and composes") {
  const RobotModel model = models::mini_humanoid();
  Configuration q0 = default_stance(model);
  ControlSequence U;
  U.dt = 0.02;
  U.controls.resize(20, model.num_joints());
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < model.num_joints(); ++j) {
      U.controls(i, j) = q0.joints[j] + 0.1 * std::sin(0.3 * i + j);
    }
  }
  DynamicsParams params = default_dynamics_params(model);
  params.mode = ControlMode::PdTarget;
  const Trajectory a = rollout(model, q0, U, params);
  const Trajectory b = rollout(model, q0, U, params);
  REQUIRE(a.states.size() == 21);
  for (size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i].q.base_position == b.states[i].q.base_position);
    CHECK(a.states[i].q.base_orientation.coeffs() ==
          b.states[i].q.base_orientation.coeffs());
    CHECK(a.states[i].q.joints == b.states[i].q.joints);
    CHECK(a.states[i].v == b.states[i].v);
  }

  ControlSequence U1{U.controls.topRows(12), U.dt};
  ControlSequence U2{U.controls.bottomRows(8), U.dt};
  const Trajectory first = rollout(model, q0, U1, params);
  const Trajectory second = rollout_from(model, first.states.back(), U2, params);
  for (int i = 0; i <= 8; ++i) {
    const State& split = second.states[i];
    const State& whole = a.states[12 + i];
    CHECK(split.q.base_position == whole.q.base_position);
    CHECK(split.q.joints == whole.q.joints);
    CHECK(split.v == whole.v);
  }
}

TEST_CASE("finite differences are exact on low-degree motions") {
  const RobotModel model = models::planar_biped();
  const double dt = 0.02;
  const int T = 12;

  SUBCASE("linear ramp gives constant velocity and zero acceleration") {
    const Vec3 lin_vel(0.3, -0.1, 0.2);
    const VecX joint_vel = VecX::LinSpaced(4, 0.1, 0.4);
    std::vector<Configuration> qs;
    for (int i = 0; i < T; ++i) {
      Configuration q = zero_configuration(model);
      q.base_position = lin_vel * (dt * i);
      q.joints = joint_vel * (dt * i);
      qs.push_back(q);
    }
    const auto d = finite_difference_derivatives(qs, dt);
    for (int i = 0; i < T; ++i) {
      CHECK((d.velocities.row(i).head<3>().transpose() - lin_vel).norm() < 1e-12);
      CHECK((d.velocities.row(i).tail(4).transpose() - joint_vel).norm() < 1e-12);
      CHECK(d.accelerations.row(i).norm() < 1e-10);
    }
  }

  SUBCASE("quadratic gives exact interior accelerations") {
    const Vec3 acc(0.5, 0.0, -9.81);
    std::vector<Configuration> qs;
    for (int i = 0; i < T; ++i) {
      const double t = dt * i;
      Configuration q = zero_configuration(model);
      q.base_position = 0.5 * acc * t * t;
      q.joints = VecX::Constant(4, 0.5 * 2.0 * t * t);
      qs.push_back(q);
    }
    const auto d = finite_difference_derivatives(qs, dt);
    for (int i = 2; i < T - 2; ++i) {
      CHECK((d.accelerations.row(i).head<3>().transpose() - acc).norm() < 1e-9);
      CHECK(d.accelerations.row(i)[6] == doctest::Approx(2.0).epsilon(1e-9));
      const Vec3 expected_vel = acc * (dt * i);
      CHECK((d.velocities.row(i).head<3>().transpose() - expected_vel).norm() < 1e-9);
    }
  }

  SUBCASE("constant-rate base rotation recovers the body angular velocity") {
    const Vec3 omega(0.0, 0.0, 1.3);
    std::vector<Configuration> qs;
    for (int i = 0; i < T; ++i) {
      Configuration q = zero_configuration(model);
      q.base_orientation = quat_exp(omega * (dt * i));
      qs.push_back(q);
    }
    const auto d = finite_difference_derivatives(qs, dt);
    for (int i = 1; i < T - 1; ++i) {
      CHECK((d.velocities.row(i).segment<3>(3).transpose() - omega).norm() < 1e-6);
      CHECK(d.accelerations.row(i).segment<3>(3).norm() < 1e-6);
    }
  }

  SUBCASE("fewer than three frames is an error") {
    std::vector<Configuration> qs(2, zero_configuration(model));
    CHECK_THROWS_AS(finite_difference_derivatives(qs, dt), DimensionError);
  }
}

TEST_CASE("contact-free energy drift stays small") {
  const RobotModel model = models::mini_humanoid();
  Configuration q0 = default_stance(model);
  q0.base_position.z() = 6.0;
  State s0{q0, VecX::Zero(model.nv())};
  s0.v.head<3>() = Vec3(0.3, -0.2, 0.5);
  s0.v.segment<3>(3) = Vec3(0.4, 0.3, -0.2);
  for (int j = 0; j < model.num_joints(); ++j) s0.v[6 + j] = 0.3 * std::sin(1.0 + j);

  ControlSequence U;
  U.controls = MatX::Zero(500, model.num_joints());
  U.dt = 0.002;
  DynamicsParams params = default_dynamics_params(model);
  params.substeps = 1;
  const Trajectory traj = rollout_from(model, s0, U, params);
  const double e0 = total_energy(model, traj.states.front());
  for (const State& s : traj.states) {
    CHECK(std::abs(total_energy(model, s) - e0) < 0.01 * std::abs(e0));
  }
}

TEST_CASE("compliant contact forces have hand-computed values") {
  const RobotModel model = box_model(1.0, Vec3(0.1, 0.1, 0.05), true);
  const ContactModelParams contact = default_contact_params(model);

  SUBCASE("penetrating and sliding fast") {
    State s{zero_configuration(model), VecX::Zero(6)};
    s.q.base_position = Vec3(0, 0, 0.05 - 1e-3);
    s.v[0] = 0.2;
    s.v[2] = -0.1;
    const auto forces = contact_forces(model, s, contact);
    REQUIRE(forces.size() == 4);
    for (const auto& f : forces) {
      CHECK(f.force.z() == doctest::Approx(2e4 * 1e-3 + 500 * 0.1).epsilon(1e-12));
      CHECK(f.force.x() == doctest::Approx(-0.8 * 70.0).epsilon(1e-12));
      CHECK(f.force.y() == doctest::Approx(0.0).epsilon(1e-12));
    }
  }

  SUBCASE("slow sliding is viscous below the regularization velocity") {
    State s{zero_configuration(model), VecX::Zero(6)};
    s.q.base_position = Vec3(0, 0, 0.05 - 1e-3);
    s.v[0] = 0.01;
    const auto forces = contact_forces(model, s, contact);
    REQUIRE(forces.size() == 4);
    const double normal = 2e4 * 1e-3;
    for (const auto& f : forces) {
      CHECK(f.force.x() == doctest::Approx(-0.8 * normal * 0.01 / 0.05).epsilon(1e-12));
    }
  }

  SUBCASE("separating fast produces no force") {
    State s{zero_configuration(model), VecX::Zero(6)};
    s.q.base_position = Vec3(0, 0, 0.05 - 1e-4);
    s.v[2] = 1.0;
    CHECK(contact_forces(model, s, contact).empty());
  }

  SUBCASE("above ground produces no force") {
    State s{zero_configuration(model), VecX::Zero(6)};
    s.q.base_position = Vec3(0, 0, 0.3);
    CHECK(contact_forces(model, s, contact).empty());
  }

  SUBCASE("friction cone holds for random penetrating states") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      State s{zero_configuration(model), rng.vector(6, 2.0)};
      s.q.base_position = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1),
                               rng.uniform(0.0, 0.06));
      s.q.base_orientation = rng.quat();
      for (const auto& f : contact_forces(model, s, contact)) {
        CHECK(f.force.z() >= 0.0);
        CHECK(f.force.head<2>().norm() <= 0.8 * f.force.z() + 1e-9);
      }
    }
  }
}

TEST_CASE("step clamps joints to limits and torques to bounds") {
  RobotModel model = pendulum_model(0.8, 0.6, 6.0);
  model.joint_limits[0].upper = 0.5;
  model.gravity = Vec3::Zero();
  Configuration q0 = zero_configuration(model);
  q0.base_position.z() = 5.0;

  ControlSequence U;
  U.controls = MatX::Constant(60, 1, 5.0);
  U.dt = 0.02;
  const DynamicsParams params = default_dynamics_params(model);
  const Trajectory traj = rollout(model, q0, U, params);
  for (const State& s : traj.states) CHECK(s.q.joints[0] <= 0.5 + 1e-12);
  CHECK(traj.states.back().q.joints[0] > 0.49);

  ControlSequence huge = U;
  huge.controls.setConstant(1e6);
  ControlSequence at_limit = U;
  at_limit.controls.setConstant(6.0);
  const Trajectory a = rollout(model, q0, huge, params);
  const Trajectory b = rollout(model, q0, at_limit, params);
  for (size_t i = 0; i < a.states.size(); ++i) {
    CHECK(a.states[i].q.joints == b.states[i].q.joints);
    CHECK(a.states[i].v == b.states[i].v);
  }
}

TEST_CASE("pd target mode drives the joint to the target") {
  RobotModel model = pendulum_model();
  model.gravity = Vec3::Zero();
  Configuration q0 = zero_configuration(model);
  q0.base_position.z() = 5.0;
  DynamicsParams params = default_dynamics_params(model);
  params.mode = ControlMode::PdTarget;
  ControlSequence U;
  U.controls = MatX::Constant(100, 1, 0.3);
  U.dt = 0.02;
  const Trajectory traj = rollout(model, q0, U, params);
  CHECK(std::abs(traj.states.back().q.joints[0] - 0.3) < 0.05);

  // holding the current position with zero velocity applies no torque
  ControlSequence hold;
  hold.controls = MatX::Zero(10, 1);
  hold.dt = 0.02;
  const Trajectory still = rollout(model, zero_configuration(model), hold, params);
  CHECK(std::abs(still.states.back().q.joints[0]) < 1e-12);
}

TEST_CASE("step reports invalid inputs") {
  const RobotModel model = models::planar_biped();
  const DynamicsParams params = default_dynamics_params(model);
  State s{default_stance(model), VecX::Zero(model.nv())};

  CHECK_THROWS_AS(step(model, s, VecX::Zero(3), 0.002, params), DimensionError);
  CHECK_THROWS_AS(step(model, s, VecX::Zero(4), 0.02, params), InvariantError);
  CHECK_THROWS_AS(step(model, s, VecX::Zero(4), 0.0, params), InvariantError);

  State bad = s;
  bad.v[2] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(step(model, bad, VecX::Zero(4), 0.002, params),
                       doctest::Contains("velocity"), DynamicsError);
}

TEST_CASE("total energy has the closed form for a single body") {
  const RobotModel model = box_model(1.0, Vec3(0.1, 0.1, 0.05), false);
  State s{zero_configuration(model), VecX::Zero(6)};
  s.q.base_position = Vec3(0, 0, 2.0);
  s.v[0] = 1.0;
  s.v[5] = 3.0;
  const double izz = model.links[0].inertia(2, 2);
  const double expected = 0.5 * 1.0 * 1.0 + 0.5 * izz * 9.0 + 1.0 * 9.81 * 2.0;
  CHECK(total_energy(model, s) == doctest::Approx(expected).epsilon(1e-12));
}
