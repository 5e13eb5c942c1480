#include "retarget/dynamics.hpp"

#include "retarget/kinematics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <string>

namespace retarget {

ContactModelParams default_contact_params(const RobotModel& model) {
  ContactModelParams params;
  params.friction = model.friction;
  return params;
}

DynamicsParams default_dynamics_params(const RobotModel& model) {
  DynamicsParams params;
  params.contact = default_contact_params(model);
  return params;
}

namespace {

// Per-link propagation state, all in link-local coordinates. E maps parent
// frame vectors into this link's frame; t is the link origin in the parent
// frame. Linear quantities refer to the link origin; gravity is folded into
// the base linear acceleration, so vd is acceleration relative to free fall.
struct LinkFrame {
  Mat3 E;
  Vec3 t;
  Vec3 w;
  Vec3 v;
  Vec3 wd;
  Vec3 vd;
};

void check_velocity_dim(const RobotModel& model, const VecX& v, const char* what) {
  if (v.size() != model.nv()) {
    throw DimensionError(std::string(what) + " has size " + std::to_string(v.size()) +
                         ", expected " + std::to_string(model.nv()));
  }
}

std::vector<LinkFrame> propagate(const RobotModel& model, const Configuration& q,
                                 const VecX& v, const VecX& a, bool fold_gravity) {
  const int n_links = static_cast<int>(model.links.size());
  std::vector<LinkFrame> lf(n_links);
  const Mat3 R0 = q.base_orientation.toRotationMatrix();

  lf[0].E = Mat3::Identity();
  lf[0].t = Vec3::Zero();
  lf[0].w = v.segment<3>(3);
  lf[0].v = R0.transpose() * v.head<3>();
  lf[0].wd = a.segment<3>(3);
  lf[0].vd = R0.transpose() *
             (a.head<3>() - (fold_gravity ? model.gravity : Vec3::Zero().eval()));

  for (int i = 1; i < n_links; ++i) {
    const Link& link = model.links[i];
    const LinkFrame& par = lf[link.parent];
    const int j = i - 1;
    const double qj = q.joints[j];
    const double qdj = v[6 + j];
    const double qddj = a[6 + j];
    const Vec3& ax = link.joint_axis;

    LinkFrame& cur = lf[i];
    cur.E = (link.offset_orientation.toRotationMatrix() *
             Eigen::AngleAxisd(qj, ax).toRotationMatrix())
                .transpose();
    cur.t = link.offset_position;
    cur.w = cur.E * par.w + ax * qdj;
    cur.v = cur.E * (par.v + par.w.cross(cur.t));
    cur.wd = cur.E * par.wd + ax * qddj + cur.w.cross(ax * qdj);
    cur.vd = cur.E * (par.vd + par.wd.cross(cur.t) + par.w.cross(par.w.cross(cur.t)));
  }
  return lf;
}

}  // namespace

VecX inverse_dynamics(const RobotModel& model, const Configuration& q, const VecX& v,
                      const VecX& a, const std::vector<ContactForce>& contacts) {
  check_configuration(model, q);
  check_velocity_dim(model, v, "velocity");
  check_velocity_dim(model, a, "acceleration");
  const int n_links = static_cast<int>(model.links.size());
  const auto lf = propagate(model, q, v, a, true);

  std::vector<Vec3> force(n_links), moment(n_links);
  for (int i = 0; i < n_links; ++i) {
    const Link& link = model.links[i];
    const Vec3 com_acc =
        lf[i].vd + lf[i].wd.cross(link.com) + lf[i].w.cross(lf[i].w.cross(link.com));
    force[i] = link.mass * com_acc;
    moment[i] = link.inertia * lf[i].wd + lf[i].w.cross(link.inertia * lf[i].w) +
                link.com.cross(force[i]);
  }

  if (!contacts.empty()) {
    const auto poses = link_poses(model, q);
    for (const ContactForce& c : contacts) {
      if (c.point < 0 || c.point >= static_cast<int>(model.contact_points.size())) {
        throw DimensionError("contact point index " + std::to_string(c.point) +
                             " out of range");
      }
      const ContactPoint& cp = model.contact_points[c.point];
      const Vec3 local = poses[cp.link].rotation.transpose() * c.force;
      force[cp.link] -= local;
      moment[cp.link] -= cp.offset.cross(local);
    }
  }

  VecX out(model.nv());
  for (int i = n_links - 1; i >= 1; --i) {
    const Link& link = model.links[i];
    out[6 + i - 1] = link.joint_axis.dot(moment[i]);
    const Vec3 fp = lf[i].E.transpose() * force[i];
    const Vec3 np = lf[i].E.transpose() * moment[i] + lf[i].t.cross(fp);
    force[link.parent] += fp;
    moment[link.parent] += np;
  }
  out.head<3>() = q.base_orientation.toRotationMatrix() * force[0];
  out.segment<3>(3) = moment[0];
  return out;
}

VecX nonlinear_bias(const RobotModel& model, const Configuration& q, const VecX& v) {
  return inverse_dynamics(model, q, v, VecX::Zero(model.nv()));
}

namespace {

// Spatial inertia about a link origin: Io (rotational block), h = m * com.
struct SpatialInertia {
  Mat3 Io;
  Vec3 h;
  double m;
};

SpatialInertia own_inertia(const Link& link) {
  const Mat3 cx = skew(link.com);
  return {link.inertia - link.mass * cx * cx, link.mass * link.com, link.mass};
}

// Re-expresses a child composite (about its origin, child frame) about the
// parent origin in the parent frame. E maps parent into child, t is the
// child origin in the parent frame.
SpatialInertia to_parent(const SpatialInertia& si, const Mat3& E, const Vec3& t) {
  const Mat3 Io_rot = E.transpose() * si.Io * E;
  const Vec3 h_rot = E.transpose() * si.h;
  const Mat3 hx = skew(h_rot);
  const Mat3 I_com = Io_rot + hx * hx / si.m;
  const Vec3 c_new = t + h_rot / si.m;
  const Mat3 cx = skew(c_new);
  return {I_com - si.m * cx * cx, si.m * c_new, si.m};
}

}  // namespace

MatX mass_matrix(const RobotModel& model, const Configuration& q) {
  check_configuration(model, q);
  const int n_links = static_cast<int>(model.links.size());
  const int nv = model.nv();
  const Mat3 R0 = q.base_orientation.toRotationMatrix();
  MatX M = MatX::Zero(nv, nv);

  std::vector<Mat3> E(n_links);
  std::vector<Vec3> t(n_links);
  std::vector<SpatialInertia> composite(n_links);
  for (int i = 0; i < n_links; ++i) {
    composite[i] = own_inertia(model.links[i]);
    if (i > 0) {
      const Link& link = model.links[i];
      E[i] = (link.offset_orientation.toRotationMatrix() *
              Eigen::AngleAxisd(q.joints[i - 1], link.joint_axis).toRotationMatrix())
                 .transpose();
      t[i] = link.offset_position;
    }
  }

  for (int i = n_links - 1; i >= 1; --i) {
    const int j = i - 1;
    const Vec3& ax = model.links[i].joint_axis;
    // wrench of a unit joint acceleration on the subtree composite
    Vec3 n = composite[i].Io * ax;
    Vec3 f = ax.cross(composite[i].h);
    M(6 + j, 6 + j) = ax.dot(n);

    int l = i;
    while (model.links[l].parent > 0) {
      const Vec3 fp = E[l].transpose() * f;
      n = E[l].transpose() * n + t[l].cross(fp);
      f = fp;
      l = model.links[l].parent;
      const int k = l - 1;
      const double entry = model.links[l].joint_axis.dot(n);
      M(6 + j, 6 + k) = entry;
      M(6 + k, 6 + j) = entry;
    }
    {
      const Vec3 fp = E[l].transpose() * f;
      n = E[l].transpose() * n + t[l].cross(fp);
      f = fp;
    }
    M.block<3, 1>(0, 6 + j) = R0 * f;
    M.block<3, 1>(3, 6 + j) = n;
    M.block<1, 3>(6 + j, 0) = (R0 * f).transpose();
    M.block<1, 3>(6 + j, 3) = n.transpose();

    const SpatialInertia merged = to_parent(composite[i], E[i], t[i]);
    SpatialInertia& parent = composite[model.links[i].parent];
    parent.Io += merged.Io;
    parent.h += merged.h;
    parent.m += merged.m;
  }

  const SpatialInertia& base = composite[0];
  const Mat3 hx = skew(base.h);
  M.block<3, 3>(0, 0) = base.m * Mat3::Identity();
  M.block<3, 3>(0, 3) = -R0 * hx;
  M.block<3, 3>(3, 0) = hx * R0.transpose();
  M.block<3, 3>(3, 3) = base.Io;
  return M;
}

std::vector<ContactForce> contact_forces(const RobotModel& model, const State& s,
                                         const ContactModelParams& contact) {
  const auto poses = link_poses(model, s.q);
  const auto lf = propagate(model, s.q, s.v, VecX::Zero(model.nv()), false);
  std::vector<ContactForce> forces;
  for (int c = 0; c < static_cast<int>(model.contact_points.size()); ++c) {
    const ContactPoint& cp = model.contact_points[c];
    const Vec3 p = poses[cp.link].position + poses[cp.link].rotation * cp.offset;
    const double depth = contact.ground_height - p.z();
    if (depth <= 0.0) continue;
    const Vec3 vel =
        poses[cp.link].rotation * (lf[cp.link].v + lf[cp.link].w.cross(cp.offset));
    const double normal =
        std::max(0.0, contact.stiffness * depth - contact.damping * vel.z());
    if (normal == 0.0) continue;
    const Vec2 tangential_vel(vel.x(), vel.y());
    const double speed = std::max(tangential_vel.norm(), contact.regularization_velocity);
    const Vec2 friction = -contact.friction * normal / speed * tangential_vel;
    forces.push_back({c, Vec3(friction.x(), friction.y(), normal)});
  }
  return forces;
}

namespace {

void check_finite(const VecX& values, const char* what) {
  if (values.allFinite()) return;
  int component = 0;
  for (int i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      component = i;
      break;
    }
  }
  throw DynamicsError("non-finite " + std::string(what) + " (component " +
                      std::to_string(component) + ")");
}

VecX clamp_torques(const RobotModel& model, const VecX& tau) {
  VecX out = tau;
  for (int j = 0; j < model.num_joints(); ++j) {
    out[j] = std::clamp(out[j], -model.joint_limits[j].torque,
                        model.joint_limits[j].torque);
  }
  return out;
}

}  // namespace

State step(const RobotModel& model, const State& s, const VecX& u, double dt,
           const DynamicsParams& params) {
  if (!(dt > 0.0) || dt > 0.01) {
    throw InvariantError("physics step dt must be in (0, 0.01] s, got " +
                         std::to_string(dt));
  }
  if (u.size() != model.num_joints()) {
    throw DimensionError("control has size " + std::to_string(u.size()) +
                         ", expected " + std::to_string(model.num_joints()));
  }
  check_configuration(model, s.q);
  check_velocity_dim(model, s.v, "velocity");
  check_finite(s.v, "velocity");

  // PD damping is integrated implicitly (the explicit update is unstable on
  // light links): the clamp is applied at the pre-step velocity and the
  // velocity solve adds kd to the joint diagonal, so the applied torque is
  // clamp(kp*e - kd*v) - kd*(v' - v), exact at steady state.
  const int n = model.num_joints();
  VecX tau(n);
  double joint_damping = 0.0;
  if (params.mode == ControlMode::Torque) {
    tau = u;
  } else {
    tau = params.kp * (u - s.q.joints) - params.kd * s.v.tail(n);
    joint_damping = params.kd;
  }
  tau = clamp_torques(model, tau);
  if (joint_damping > 0.0) tau += joint_damping * s.v.tail(n);

  // Penetrating contact points. Normal damping and the viscous (regularized)
  // friction slope are folded into the velocity solve implicitly: the
  // explicit update is unstable at the default gains and physics dt.
  struct ActiveContact {
    double spring;   // k * depth, N
    double viscous;  // tangential force per unit slip velocity, N*s/m
    MatX J;          // 3 x nv world point Jacobian
  };
  const ContactModelParams& cm = params.contact;
  std::vector<ActiveContact> active;
  {
    const auto poses = link_poses(model, s.q);
    for (int c = 0; c < static_cast<int>(model.contact_points.size()); ++c) {
      const ContactPoint& cp = model.contact_points[c];
      const Vec3 p = poses[cp.link].position + poses[cp.link].rotation * cp.offset;
      const double depth = cm.ground_height - p.z();
      if (depth <= 0.0) continue;
      MatX J = contact_point_jacobian(model, s.q, c);
      const Vec3 vp = J * s.v;
      const double spring = cm.stiffness * depth;
      const double normal_est = std::max(0.0, spring - cm.damping * vp.z());
      const double speed = std::max(vp.head<2>().norm(), cm.regularization_velocity);
      active.push_back({spring, cm.friction * normal_est / speed, std::move(J)});
    }
  }

  VecX applied = -nonlinear_bias(model, s.q, s.v);
  applied.tail(n) += tau;
  const MatX M = mass_matrix(model, s.q);
  const VecX momentum = M * s.v;

  // First-order implicit normal force: k*(depth - dt*vz') - d*vz', so the
  // effective velocity coefficient on the normal row is d + dt*k.
  const double normal_coeff = cm.damping + dt * cm.stiffness;
  VecX v_next;
  std::vector<char> pushing(active.size(), 1);
  for (int pass = 0;; ++pass) {
    MatX H = M;
    if (joint_damping > 0.0) {
      H.diagonal().tail(n).array() += dt * joint_damping;
    }
    VecX force = applied;
    for (size_t i = 0; i < active.size(); ++i) {
      if (!pushing[i]) continue;
      const ActiveContact& a = active[i];
      force.noalias() += a.J.row(2).transpose() * a.spring;
      H.noalias() += (dt * normal_coeff) * (a.J.row(2).transpose() * a.J.row(2));
      H.noalias() += (dt * a.viscous) * (a.J.topRows(2).transpose() * a.J.topRows(2));
    }
    v_next = H.ldlt().solve(momentum + dt * force);
    // a point whose implicit normal force turns negative is separating:
    // drop it entirely and re-solve
    bool changed = false;
    for (size_t i = 0; i < active.size(); ++i) {
      if (!pushing[i]) continue;
      if (active[i].spring - normal_coeff * (active[i].J.row(2) * v_next)(0) < 0.0) {
        pushing[i] = 0;
        changed = true;
      }
    }
    if (!changed || pass >= static_cast<int>(active.size())) break;
  }
  check_finite(v_next, "velocity");

  State next;
  next.v = v_next;
  for (int j = 0; j < n; ++j) {
    const JointLimits& lim = model.joint_limits[j];
    next.v[6 + j] = std::clamp(next.v[6 + j], -lim.velocity, lim.velocity);
  }
  next.q = integrate(s.q, next.v, dt);
  for (int j = 0; j < n; ++j) {
    const JointLimits& lim = model.joint_limits[j];
    if (next.q.joints[j] < lim.lower) {
      next.q.joints[j] = lim.lower;
      if (next.v[6 + j] < 0.0) next.v[6 + j] = 0.0;
    } else if (next.q.joints[j] > lim.upper) {
      next.q.joints[j] = lim.upper;
      if (next.v[6 + j] > 0.0) next.v[6 + j] = 0.0;
    }
  }
  if (!next.q.base_position.allFinite() || !next.q.joints.allFinite() ||
      !next.q.base_orientation.coeffs().allFinite()) {
    throw DynamicsError("non-finite configuration after integration");
  }
  return next;
}

Trajectory rollout_from(const RobotModel& model, const State& s0,
                        const ControlSequence& U, const DynamicsParams& params) {
  if (U.controls.cols() != model.num_joints()) {
    throw DimensionError("control sequence has " + std::to_string(U.controls.cols()) +
                         " columns, expected " + std::to_string(model.num_joints()));
  }
  if (params.substeps < 1) throw InvariantError("substeps must be >= 1");
  if (!(U.dt > 0.0)) throw InvariantError("control dt must be > 0");
  const double dt = U.dt / params.substeps;

  Trajectory traj;
  traj.dt = U.dt;
  traj.states.reserve(U.T() + 1);
  traj.states.push_back(s0);
  State s = s0;
  for (int i = 0; i < U.T(); ++i) {
    const VecX u = U.controls.row(i).transpose();
    try {
      for (int k = 0; k < params.substeps; ++k) s = step(model, s, u, dt, params);
    } catch (const DynamicsError& e) {
      throw DynamicsError(std::string(e.what()) + " (control step " + std::to_string(i) +
                          ")");
    }
    traj.states.push_back(s);
  }
  return traj;
}

Trajectory rollout(const RobotModel& model, const Configuration& q0,
                   const ControlSequence& U, const DynamicsParams& params) {
  return rollout_from(model, {q0, VecX::Zero(model.nv())}, U, params);
}

TrajectoryDerivatives finite_difference_derivatives(const std::vector<Configuration>& qs,
                                                    double dt) {
  const int T = static_cast<int>(qs.size());
  if (T < 3) {
    throw DimensionError("finite differences need at least 3 frames, got " +
                         std::to_string(T));
  }
  if (!(dt > 0.0)) throw InvariantError("dt must be > 0");
  const int nv = 6 + qs.front().n_q();

  auto diff = [&](int a, int b, double h) {
    VecX v(nv);
    v.head<3>() = (qs[b].base_position - qs[a].base_position) / h;
    v.segment<3>(3) =
        quat_log(qs[a].base_orientation.conjugate() * qs[b].base_orientation) / h;
    v.tail(nv - 6) = (qs[b].joints - qs[a].joints) / h;
    return v;
  };

  TrajectoryDerivatives d;
  d.velocities.resize(T, nv);
  d.accelerations.resize(T, nv);
  for (int i = 0; i < T; ++i) {
    if (i == 0) {
      d.velocities.row(i) = diff(0, 1, dt).transpose();
    } else if (i == T - 1) {
      d.velocities.row(i) = diff(T - 2, T - 1, dt).transpose();
    } else {
      d.velocities.row(i) = diff(i - 1, i + 1, 2.0 * dt).transpose();
    }
  }
  for (int i = 0; i < T; ++i) {
    if (i == 0) {
      d.accelerations.row(i) = (d.velocities.row(1) - d.velocities.row(0)) / dt;
    } else if (i == T - 1) {
      d.accelerations.row(i) = (d.velocities.row(T - 1) - d.velocities.row(T - 2)) / dt;
    } else {
      d.accelerations.row(i) =
          (d.velocities.row(i + 1) - d.velocities.row(i - 1)) / (2.0 * dt);
    }
  }
  return d;
}

double total_energy(const RobotModel& model, const State& s) {
  const MatX M = mass_matrix(model, s.q);
  const double kinetic = 0.5 * s.v.dot(M * s.v);
  const auto poses = link_poses(model, s.q);
  double potential = 0.0;
  for (size_t i = 0; i < model.links.size(); ++i) {
    const Vec3 com = poses[i].position + poses[i].rotation * model.links[i].com;
    potential -= model.links[i].mass * model.gravity.dot(com);
  }
  return kinetic + potential;
}

}  // namespace retarget
