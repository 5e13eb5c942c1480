#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "retarget/types.hpp"

namespace retarget {

/// Position / velocity / torque bounds of one actuated joint.
struct JointLimits {
  double lower = 0.0;       // rad
  double upper = 0.0;       // rad
  double velocity = 0.0;    // rad/s, > 0
  double torque = 0.0;      // N*m, > 0
};

/// One rigid link of the kinematic tree. Link 0 is the floating base and
/// carries no joint; every other link is attached to its parent by a single
/// revolute joint located at the link-frame origin. The fixed transform
/// (offset_position, offset_orientation) maps the link frame into the parent
/// frame before the joint rotation is applied.
struct Link {
  std::string name;
  int parent = -1;
  Vec3 joint_axis = Vec3::UnitZ();   // unit vector, link frame
  Vec3 offset_position = Vec3::Zero();
  Quat offset_orientation = Quat::Identity();
  double mass = 0.0;                 // kg, > 0
  Vec3 com = Vec3::Zero();           // link frame, m
  Mat3 inertia = Mat3::Identity();   // about com, link frame, kg*m^2, SPD
};

/// Named 3D marker rigidly attached to a link.
struct Keypoint {
  std::string name;
  int link = 0;
  Vec3 offset = Vec3::Zero();  // link frame, m
};

/// Candidate ground-contact site. Points sharing a group label (e.g.
/// "left_foot") form one contact group for estimation and metrics.
struct ContactPoint {
  std::string name;
  int link = 0;
  Vec3 offset = Vec3::Zero();  // link frame, m
  std::string group;
};

/// Complete robot description. Immutable after load; safe to share read-only
/// across concurrent workers.
struct RobotModel {
  std::string name;
  std::vector<Link> links;                 // links[0] is the floating base
  std::vector<JointLimits> joint_limits;   // size num_joints()
  std::vector<Keypoint> keypoints;
  std::vector<std::pair<int, int>> keypoint_adjacency;
  std::vector<ContactPoint> contact_points;
  double friction = 0.8;
  Vec3 gravity = Vec3(0, 0, -9.81);

  /// n_q: number of single-DOF actuated joints. Joint j drives link j+1.
  int num_joints() const { return static_cast<int>(links.size()) - 1; }
  int num_keypoints() const { return static_cast<int>(keypoints.size()); }
  /// Velocity-space dimension: 6 base DOF plus the joints.
  int nv() const { return 6 + num_joints(); }

  double total_mass() const;
  /// Contact group labels in first-appearance order.
  std::vector<std::string> contact_groups() const;
  /// Indices of contact points belonging to `group`.
  std::vector<int> contact_group_points(const std::string& group) const;
  /// Index of the keypoint with the given name, if present.
  std::optional<int> keypoint_index(const std::string& name) const;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool valid() const { return violations.empty(); }
};

/// Parses a model document (JSON; see docs/model_format.md). Quaternions are
/// normalized on load. Throws ParseError on malformed input and
/// InvariantError naming the violated rule otherwise.
RobotModel load_model(const std::string& text);

/// Reads the file at `path` and delegates to load_model.
RobotModel load_model_file(const std::string& path);

/// Parses without enforcing invariants (still throws ParseError); feeds
/// validate_model so checkers can list every violation of a bad document.
RobotModel load_model_unchecked(const std::string& text);

/// Lists every violated model invariant; an empty report means valid.
/// Never throws and never mutates the model.
ValidationReport validate_model(const RobotModel& model);

/// Canonical JSON serialization. load_model(serialize_model(m)) reproduces m
/// on the canonical field set.
std::string serialize_model(const RobotModel& model);

namespace models {

/// 2D-constrained 5-link biped: 4 actuated DOF (two hips, two knees, all
/// pitch), 4 keypoints, 2 point-foot contacts. Used by fast unit tests.
RobotModel planar_biped();

/// Desk-scale 3D humanoid: floating base with fixed torso, 12 actuated DOF
/// (per leg: hip pitch, hip roll, knee, ankle pitch; per arm: shoulder pitch,
/// elbow), 8 keypoints (pelvis, torso, shoulders, hands, feet) and 8 contact
/// points (4 per foot sole corner).
RobotModel mini_humanoid();

}  // namespace models

}  // namespace retarget
