#include "retarget/model.hpp"

namespace retarget::models {

namespace {

Mat3 box_inertia(double mass, double sx, double sy, double sz) {
  Mat3 I = Mat3::Zero();
  I(0, 0) = mass * (sy * sy + sz * sz) / 12.0;
  I(1, 1) = mass * (sx * sx + sz * sz) / 12.0;
  I(2, 2) = mass * (sx * sx + sy * sy) / 12.0;
  return I;
}

Mat3 rod_inertia(double mass, double length, double radius) {
  Mat3 I = Mat3::Zero();
  const double transverse = mass * (3.0 * radius * radius + length * length) / 12.0;
  I(0, 0) = transverse;
  I(1, 1) = transverse;
  I(2, 2) = 0.5 * mass * radius * radius;
  return I;
}

Link make_link(const std::string& name, int parent, const Vec3& axis,
               const Vec3& position, double mass, const Vec3& com,
               const Mat3& inertia) {
  Link link;
  link.name = name;
  link.parent = parent;
  link.joint_axis = axis;
  link.offset_position = position;
  link.mass = mass;
  link.com = com;
  link.inertia = inertia;
  return link;
}

JointLimits limits(double lower, double upper, double torque, double velocity = 20.0) {
  JointLimits lim;
  lim.lower = lower;
  lim.upper = upper;
  lim.velocity = velocity;
  lim.torque = torque;
  return lim;
}

}  // namespace

RobotModel planar_biped() {
  RobotModel m;
  m.name = "planar_biped";
  const Vec3 y = Vec3::UnitY();

  Link base;
  base.name = "base";
  base.parent = -1;
  base.mass = 1.0;
  base.com = Vec3(0, 0, 0.05);
  base.inertia = box_inertia(1.0, 0.08, 0.12, 0.16);
  m.links.push_back(base);

  const double thigh_len = 0.16;
  const double shank_len = 0.16;
  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const double sy = side == 0 ? 0.05 : -0.05;
    const int base_idx = 0;
    m.links.push_back(make_link(s + "_thigh", base_idx, y, Vec3(0, sy, 0), 0.3,
                                Vec3(0, 0, -thigh_len / 2), rod_inertia(0.3, thigh_len, 0.02)));
    const int thigh_idx = static_cast<int>(m.links.size()) - 1;
    m.links.push_back(make_link(s + "_shank", thigh_idx, y, Vec3(0, 0, -thigh_len), 0.2,
                                Vec3(0, 0, -shank_len / 2), rod_inertia(0.2, shank_len, 0.015)));
    const int shank_idx = static_cast<int>(m.links.size()) - 1;
    m.joint_limits.push_back(limits(-2.5, 2.5, 6.0));   // hip
    m.joint_limits.push_back(limits(-0.05, 2.4, 6.0));  // knee

    ContactPoint cp;
    cp.name = s + "_foot";
    cp.link = shank_idx;
    cp.offset = Vec3(0, 0, -shank_len);
    cp.group = s + "_foot";
    m.contact_points.push_back(cp);

    Keypoint kp;
    kp.name = s + "_foot";
    kp.link = shank_idx;
    kp.offset = Vec3(0, 0, -shank_len);
    m.keypoints.push_back(kp);
  }

  Keypoint pelvis;
  pelvis.name = "pelvis";
  pelvis.link = 0;
  pelvis.offset = Vec3::Zero();
  m.keypoints.push_back(pelvis);

  Keypoint torso;
  torso.name = "torso";
  torso.link = 0;
  torso.offset = Vec3(0, 0, 0.12);
  m.keypoints.push_back(torso);

  const int kp_lf = 0, kp_rf = 1, kp_pelvis = 2, kp_torso = 3;
  m.keypoint_adjacency = {{kp_pelvis, kp_torso}, {kp_pelvis, kp_lf}, {kp_pelvis, kp_rf}};
  return m;
}

RobotModel mini_humanoid() {
  RobotModel m;
  m.name = "mini_humanoid";
  const Vec3 x = Vec3::UnitX();
  const Vec3 y = Vec3::UnitY();

  Link base;
  base.name = "pelvis_torso";
  base.parent = -1;
  base.mass = 1.2;
  base.com = Vec3(0, 0, 0.09);
  base.inertia = box_inertia(1.2, 0.10, 0.14, 0.28);
  m.links.push_back(base);

  const double thigh_len = 0.14;
  const double shank_len = 0.14;
  const double upper_arm_len = 0.10;
  const double forearm_len = 0.10;
  const double sole_drop = 0.04;

  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const double sy = side == 0 ? 0.06 : -0.06;

    m.links.push_back(make_link(s + "_hip_pitch", 0, y, Vec3(0, sy, -0.04), 0.1,
                                Vec3::Zero(), Mat3::Identity() * 5e-5));
    const int hip_pitch = static_cast<int>(m.links.size()) - 1;
    m.joint_limits.push_back(limits(-2.0, 2.0, 8.0));

    m.links.push_back(make_link(s + "_thigh", hip_pitch, x, Vec3::Zero(), 0.35,
                                Vec3(0, 0, -thigh_len / 2), rod_inertia(0.35, thigh_len, 0.025)));
    const int thigh = static_cast<int>(m.links.size()) - 1;
    m.joint_limits.push_back(limits(-0.8, 0.8, 8.0));  // hip roll

    m.links.push_back(make_link(s + "_shank", thigh, y, Vec3(0, 0, -thigh_len), 0.25,
                                Vec3(0, 0, -shank_len / 2), rod_inertia(0.25, shank_len, 0.02)));
    const int shank = static_cast<int>(m.links.size()) - 1;
    m.joint_limits.push_back(limits(-0.05, 2.4, 10.0));  // knee

    m.links.push_back(make_link(s + "_foot", shank, y, Vec3(0, 0, -shank_len), 0.12,
                                Vec3(0.01, 0, -0.025), box_inertia(0.12, 0.10, 0.05, 0.03)));
    const int foot = static_cast<int>(m.links.size()) - 1;
    m.joint_limits.push_back(limits(-1.2, 1.2, 4.0));  // ankle pitch

    for (int cx = 0; cx < 2; ++cx) {
      for (int cy = 0; cy < 2; ++cy) {
        ContactPoint cp;
        cp.name = s + "_foot_" + (cx == 0 ? "front" : "back") + (cy == 0 ? "_in" : "_out");
        cp.link = foot;
        const double ox = cx == 0 ? 0.04 : -0.04;
        double oy = cy == 0 ? 0.02 : -0.02;
        if (side == 1) oy = -oy;
        cp.offset = Vec3(ox, oy, -sole_drop);
        cp.group = s + "_foot";
        m.contact_points.push_back(cp);
      }
    }

    Keypoint foot_kp;
    foot_kp.name = s + "_foot";
    foot_kp.link = foot;
    foot_kp.offset = Vec3(0, 0, -0.03);
    m.keypoints.push_back(foot_kp);
  }

  for (int side = 0; side < 2; ++side) {
    const std::string s = side == 0 ? "left" : "right";
    const double sy = side == 0 ? 0.09 : -0.09;

    m.links.push_back(make_link(s + "_upper_arm", 0, y, Vec3(0, sy, 0.16), 0.15,
                                Vec3(0, 0, -upper_arm_len / 2),
                                rod_inertia(0.15, upper_arm_len, 0.015)));
    const int upper_arm = static_cast<int>(m.links.size()) - 1;
    m.joint_limits.push_back(limits(-2.5, 2.5, 4.0));  // shoulder pitch

    m.links.push_back(make_link(s + "_forearm", upper_arm, y, Vec3(0, 0, -upper_arm_len), 0.10,
                                Vec3(0, 0, -forearm_len / 2),
                                rod_inertia(0.10, forearm_len, 0.012)));
    const int forearm = static_cast<int>(m.links.size()) - 1;
    m.joint_limits.push_back(limits(-2.4, 0.05, 3.0));  // elbow

    Keypoint hand;
    hand.name = s + "_hand";
    hand.link = forearm;
    hand.offset = Vec3(0, 0, -forearm_len);
    m.keypoints.push_back(hand);
  }

  Keypoint pelvis;
  pelvis.name = "pelvis";
  pelvis.link = 0;
  pelvis.offset = Vec3::Zero();
  m.keypoints.push_back(pelvis);

  Keypoint torso;
  torso.name = "torso";
  torso.link = 0;
  torso.offset = Vec3(0, 0, 0.18);
  m.keypoints.push_back(torso);

  for (int side = 0; side < 2; ++side) {
    Keypoint sh;
    sh.name = side == 0 ? "left_shoulder" : "right_shoulder";
    sh.link = 0;
    sh.offset = Vec3(0, side == 0 ? 0.09 : -0.09, 0.16);
    m.keypoints.push_back(sh);
  }

  // 0 left_foot, 1 right_foot, 2 left_hand, 3 right_hand,
  // 4 pelvis, 5 torso, 6 left_shoulder, 7 right_shoulder
  m.keypoint_adjacency = {{4, 5}, {5, 6}, {5, 7}, {6, 2}, {7, 3}, {4, 0}, {4, 1}};
  return m;
}

}  // namespace retarget::models
