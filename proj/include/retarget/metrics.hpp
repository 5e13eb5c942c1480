#pragma once

#include <vector>

#include "retarget/feasibility.hpp"
#include "retarget/kinematics.hpp"
#include "retarget/retarget_cost.hpp"
#include "retarget/state.hpp"

namespace retarget {

struct MetricsReport {
  double contact_error_rate = 0.0;   // in [0, 1]
  bool success = true;               // 0.5 m pelvis rule
  double joints_rmse = 0.0;          // rad
  double mean_position_error = 0.0;  // m
  double mean_laplacian_error = 0.0; // m
  double foot_slip = 0.0;            // m
};

struct AggregateValue {
  double mean = 0.0;
  double std = 0.0;  // population convention (divide by n)
};

struct AggregateReport {
  AggregateValue contact_error_rate;
  AggregateValue joints_rmse;
  AggregateValue mean_position_error;
  AggregateValue mean_laplacian_error;
  AggregateValue foot_slip;
  double success_rate = 0.0;
  int count = 0;
};

/// Fraction of differing flags over all (timestep, group) cells. Symmetric.
double contact_error_rate(const ContactSequence& estimated, const ContactSequence& truth);

/// False iff the pelvis ever deviates from its reference by more than
/// `threshold` meters. Rows are per-frame world positions.
bool success(const MatX3& pelvis, const MatX3& pelvis_ref, double threshold = 0.5);

struct TrackingErrors {
  double joints_rmse = 0.0;
  double mean_position_error = 0.0;
  double mean_laplacian_error = 0.0;
};

/// RMSE over all (frame, joint) angle differences; mean over (frame,
/// keypoint) of Euclidean keypoint distances; mean over (frame, keypoint) of
/// the per-keypoint Laplacian error. Frames and keypoints average jointly.
TrackingErrors tracking_errors(const std::vector<Configuration>& Q,
                               const std::vector<Configuration>& Q_ref,
                               const KeypointTrajectory& x, const KeypointTrajectory& x_ref,
                               const LaplacianMatrix& L);

/// Summed horizontal displacement of each contact group's centroid across
/// consecutive frame pairs with the group flagged in contact at both ends.
double foot_slip(const RobotModel& model, const std::vector<Configuration>& qs,
                 const ContactSequence& contacts);

/// Weights and length scales of the tracking-reward rows; defaults follow
/// the reward table. The contact-force threshold in the slip indicator has
/// no published value; 5 N is this repo's default.
struct RewardScales {
  double joint_pos_weight = 0.5;
  double joint_pos_scale = 2.0;
  double joint_vel_weight = 0.1;
  double joint_vel_scale = 10.0;
  double root_pose_weight = 0.15;
  double root_pose_scale = 0.45;
  double root_angle_coeff = 0.1;
  double root_vel_weight = 0.1;
  double root_vel_scale = 1.0;
  double root_angvel_coeff = 0.1;
  double ee_pos_weight = 0.15;
  double ee_pos_scale = 0.32;
  double joint_acc_weight = 1e-7;
  double torque_weight = 1e-7;
  double action_rate_weight = 0.1;
  double joint_vel_penalty_weight = 0.005;
  double foot_slip_weight = 0.2;
  double contact_force_threshold = 5.0;  // F_th, N
};

/// Inputs of one reward evaluation. End-effector rows pair up positionally
/// with their reference rows; foot velocity/force entries pair per contact
/// group.
struct RewardInputs {
  State state;
  State ref_state;
  MatX3 ee_positions;
  MatX3 ee_ref_positions;
  VecX joint_accelerations;
  VecX applied_torques;
  VecX action;
  VecX prev_action;
  std::vector<Vec2> foot_xy_velocities;
  VecX foot_contact_forces;
};

/// One scalar per reward row. Tracking rows are exp-of-negative-error terms
/// in (0, weight]; penalty rows are <= 0; total is their sum.
struct RewardBreakdown {
  double joint_position = 0.0;
  double joint_velocity = 0.0;
  double root_pose = 0.0;
  double root_velocity = 0.0;
  double end_effector = 0.0;
  double joint_acceleration_penalty = 0.0;
  double torque_penalty = 0.0;
  double action_rate_penalty = 0.0;
  double joint_velocity_penalty = 0.0;
  double foot_slip_penalty = 0.0;
  double total = 0.0;
};

RewardBreakdown reward_terms(const RewardInputs& inputs, const RewardScales& scales = {});

/// Mean and population standard deviation per field; success rate is the
/// fraction of successful reports.
AggregateReport aggregate_seeds(const std::vector<MetricsReport>& reports);

}  // namespace retarget
