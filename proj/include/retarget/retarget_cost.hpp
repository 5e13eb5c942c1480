#pragma once

#include "retarget/kinematics.hpp"
#include "retarget/types.hpp"

#include <utility>
#include <vector>

namespace retarget {

/// Graph Laplacian L = D - A over the keypoint skeleton, unit edge weights.
/// Symmetric, positive semidefinite, rows sum to zero.
struct LaplacianMatrix {
  MatX L;  // m x m

  int m() const { return static_cast<int>(L.rows()); }
};

/// Weights of the combined task-space distance d = w_p * E_p + w_l * E_l.
/// `keypoint_weights` (empty = all ones) weight individual keypoints in both
/// terms; a zero entry removes that keypoint entirely, including its
/// contribution to neighbors through L.
struct CostWeights {
  double w_p = 1.0;
  double w_l = 1.0;
  VecX keypoint_weights;
};

LaplacianMatrix build_laplacian(const std::vector<std::pair<int, int>>& adjacency, int m);

/// E_p: sum over frames and keypoints of w_k * squared Euclidean distance.
double spatial_cost(const KeypointTrajectory& x, const KeypointTrajectory& x_tilde,
                    const VecX& keypoint_weights = VecX());

/// E_l: sum over frames of (1/m) * sum_k w_k * squared norm of the k-th
/// 3-block of L applied per coordinate channel to the keypoint differences.
/// Zero-weight keypoints have their difference rows zeroed before L.
double laplacian_cost(const KeypointTrajectory& x, const KeypointTrajectory& x_tilde,
                      const LaplacianMatrix& L, const VecX& keypoint_weights = VecX());

/// d = w_p * E_p + w_l * E_l; the objective handed to IK and the sampling
/// planner.
double combined_distance(const KeypointTrajectory& x, const KeypointTrajectory& x_tilde,
                         const LaplacianMatrix& L, const CostWeights& weights);

/// Norm of the k-th 3-block of L applied to the frame-t keypoint differences;
/// the per-keypoint deformation error that reports and plots aggregate.
double per_keypoint_laplacian_error(const KeypointTrajectory& x,
                                    const KeypointTrajectory& x_tilde,
                                    const LaplacianMatrix& L, int t, int k);

}  // namespace retarget
