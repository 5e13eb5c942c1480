#include "retarget/kinematics.hpp"

#include <limits>

namespace retarget {

std::vector<LinkPose> link_poses(const RobotModel& model, const Configuration& q) {
  const int n_links = static_cast<int>(model.links.size());
  std::vector<LinkPose> poses(n_links);
  poses[0].rotation = q.base_orientation.toRotationMatrix();
  poses[0].position = q.base_position;
  for (int i = 1; i < n_links; ++i) {
    const Link& link = model.links[i];
    const LinkPose& parent = poses[link.parent];
    const Mat3 joint_rot =
        Eigen::AngleAxisd(q.joints[i - 1], link.joint_axis).toRotationMatrix();
    poses[i].rotation =
        parent.rotation * link.offset_orientation.toRotationMatrix() * joint_rot;
    poses[i].position = parent.position + parent.rotation * link.offset_position;
  }
  return poses;
}

KeypointSet keypoint_positions(const RobotModel& model, const Configuration& q) {
  const auto poses = link_poses(model, q);
  KeypointSet set;
  set.positions.resize(model.num_keypoints(), 3);
  for (int k = 0; k < model.num_keypoints(); ++k) {
    const Keypoint& kp = model.keypoints[k];
    set.positions.row(k) =
        (poses[kp.link].position + poses[kp.link].rotation * kp.offset).transpose();
  }
  return set;
}

KeypointTrajectory fk_configurations(const RobotModel& model,
                                     const std::vector<Configuration>& qs, double dt) {
  KeypointTrajectory x;
  x.dt = dt;
  x.adjacency = model.keypoint_adjacency;
  for (const Keypoint& kp : model.keypoints) x.names.push_back(kp.name);
  x.frames.reserve(qs.size());
  for (const Configuration& q : qs) x.frames.push_back(keypoint_positions(model, q));
  return x;
}

KeypointTrajectory fk_trajectory(const RobotModel& model, const Trajectory& trajectory) {
  return fk_configurations(model, configurations(trajectory), trajectory.dt);
}

namespace {

MatX point_jacobian(const RobotModel& model, const Configuration& q,
                    const std::vector<LinkPose>& poses, int link, const Vec3& offset) {
  MatX J = MatX::Zero(3, model.nv());
  const Vec3 p = poses[link].position + poses[link].rotation * offset;
  J.block<3, 3>(0, 0) = Mat3::Identity();
  J.block<3, 3>(0, 3) =
      -skew(p - poses[0].position) * poses[0].rotation;
  for (int l = link; l > 0; l = model.links[l].parent) {
    const Vec3 axis_world = poses[l].rotation * model.links[l].joint_axis;
    J.col(6 + l - 1) = axis_world.cross(p - poses[l].position);
  }
  return J;
}

}  // namespace

MatX keypoint_jacobian(const RobotModel& model, const Configuration& q, int k) {
  const Keypoint& kp = model.keypoints.at(k);
  return point_jacobian(model, q, link_poses(model, q), kp.link, kp.offset);
}

std::vector<MatX> keypoint_jacobians(const RobotModel& model, const Configuration& q) {
  const auto poses = link_poses(model, q);
  std::vector<MatX> jacobians;
  jacobians.reserve(model.num_keypoints());
  for (const Keypoint& kp : model.keypoints) {
    jacobians.push_back(point_jacobian(model, q, poses, kp.link, kp.offset));
  }
  return jacobians;
}

Vec3 contact_point_position(const RobotModel& model, const std::vector<LinkPose>& poses,
                            int point) {
  const ContactPoint& cp = model.contact_points.at(point);
  return poses[cp.link].position + poses[cp.link].rotation * cp.offset;
}

MatX contact_point_jacobian(const RobotModel& model, const Configuration& q, int point) {
  const ContactPoint& cp = model.contact_points.at(point);
  return point_jacobian(model, q, link_poses(model, q), cp.link, cp.offset);
}

Configuration project_to_ground(const RobotModel& model, Configuration q,
                                double ground_height) {
  if (model.contact_points.empty()) return q;
  const auto poses = link_poses(model, q);
  double lowest = std::numeric_limits<double>::infinity();
  for (int c = 0; c < static_cast<int>(model.contact_points.size()); ++c) {
    lowest = std::min(lowest, contact_point_position(model, poses, c).z());
  }
  q.base_position.z() += ground_height - lowest;
  return q;
}

Configuration default_stance(const RobotModel& model) {
  return project_to_ground(model, zero_configuration(model));
}

}  // namespace retarget
