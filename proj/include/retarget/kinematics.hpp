#pragma once

#include <string>
#include <utility>
#include <vector>

#include "retarget/model.hpp"
#include "retarget/state.hpp"

namespace retarget {

/// World pose of one link.
struct LinkPose {
  Mat3 rotation;  // link frame -> world
  Vec3 position;  // link origin, world, m
};

/// World positions of the model's m keypoints at one instant.
struct KeypointSet {
  MatX3 positions;  // m x 3

  int m() const { return static_cast<int>(positions.rows()); }
};

/// Keypoint positions over T frames with the skeleton edges used to build
/// the Laplacian. `names` carries the per-row keypoint identity; it is copied
/// from the source file or from the model.
struct KeypointTrajectory {
  std::vector<KeypointSet> frames;
  double dt = 0.0;
  std::vector<std::pair<int, int>> adjacency;
  std::vector<std::string> names;

  int T() const { return static_cast<int>(frames.size()); }
  int m() const { return frames.empty() ? 0 : frames.front().m(); }
};

/// World pose of every link, composed root to leaf.
std::vector<LinkPose> link_poses(const RobotModel& model, const Configuration& q);

/// World positions of all m keypoints.
KeypointSet keypoint_positions(const RobotModel& model, const Configuration& q);

/// Per-frame keypoint_positions over a whole trajectory; dt and names copied.
KeypointTrajectory fk_trajectory(const RobotModel& model, const Trajectory& trajectory);
KeypointTrajectory fk_configurations(const RobotModel& model,
                                     const std::vector<Configuration>& qs, double dt);

/// Geometric Jacobian of keypoint k: 3 x (6+n_q) matrix J with keypoint
/// world velocity = J * generalized velocity, in the State velocity
/// convention (base linear world, base angular body, then joints).
MatX keypoint_jacobian(const RobotModel& model, const Configuration& q, int k);

/// All m keypoint Jacobians, sharing one pose pass.
std::vector<MatX> keypoint_jacobians(const RobotModel& model, const Configuration& q);

/// World position of one contact point.
Vec3 contact_point_position(const RobotModel& model,
                            const std::vector<LinkPose>& poses, int point);

/// Contact-point Jacobian, same convention as keypoint_jacobian.
MatX contact_point_jacobian(const RobotModel& model, const Configuration& q, int point);

/// Shifts the base vertically so the lowest contact point sits on the ground.
Configuration project_to_ground(const RobotModel& model, Configuration q,
                                double ground_height = 0.0);

/// Zero-joint configuration projected to ground contact.
Configuration default_stance(const RobotModel& model);

}  // namespace retarget
