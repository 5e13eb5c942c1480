#include "retarget/retarget_cost.hpp"

#include <string>

namespace retarget {

namespace {

void check_shapes(const KeypointTrajectory& x, const KeypointTrajectory& x_tilde) {
  if (x.T() != x_tilde.T()) {
    throw DimensionError("keypoint trajectories differ in frame count: " +
                         std::to_string(x.T()) + " vs " + std::to_string(x_tilde.T()));
  }
  if (x.m() != x_tilde.m()) {
    throw DimensionError("keypoint trajectories differ in keypoint count: " +
                         std::to_string(x.m()) + " vs " + std::to_string(x_tilde.m()));
  }
}

VecX resolve_weights(const VecX& keypoint_weights, int m) {
  if (keypoint_weights.size() == 0) return VecX::Ones(m);
  if (keypoint_weights.size() != m) {
    throw DimensionError("keypoint weight vector has size " +
                         std::to_string(keypoint_weights.size()) + ", expected " +
                         std::to_string(m));
  }
  return keypoint_weights;
}

}  // namespace

LaplacianMatrix build_laplacian(const std::vector<std::pair<int, int>>& adjacency, int m) {
  LaplacianMatrix lap;
  lap.L = MatX::Zero(m, m);
  for (const auto& [a, b] : adjacency) {
    if (a < 0 || a >= m || b < 0 || b >= m) {
      throw DimensionError("adjacency edge (" + std::to_string(a) + "," +
                           std::to_string(b) + ") out of range for m=" + std::to_string(m));
    }
    if (a == b) {
      throw InvariantError("adjacency self-loop at keypoint " + std::to_string(a));
    }
    lap.L(a, a) += 1.0;
    lap.L(b, b) += 1.0;
    lap.L(a, b) -= 1.0;
    lap.L(b, a) -= 1.0;
  }
  return lap;
}

double spatial_cost(const KeypointTrajectory& x, const KeypointTrajectory& x_tilde,
                    const VecX& keypoint_weights) {
  check_shapes(x, x_tilde);
  const VecX w = resolve_weights(keypoint_weights, x.m());
  double cost = 0.0;
  for (int i = 0; i < x.T(); ++i) {
    const MatX3 diff = x.frames[i].positions - x_tilde.frames[i].positions;
    cost += (diff.rowwise().squaredNorm().array() * w.array()).sum();
  }
  return cost;
}

double laplacian_cost(const KeypointTrajectory& x, const KeypointTrajectory& x_tilde,
                      const LaplacianMatrix& L, const VecX& keypoint_weights) {
  check_shapes(x, x_tilde);
  const int m = x.m();
  if (L.m() != m) {
    throw DimensionError("Laplacian size " + std::to_string(L.m()) +
                         " does not match keypoint count " + std::to_string(m));
  }
  const VecX w = resolve_weights(keypoint_weights, m);
  double cost = 0.0;
  for (int i = 0; i < x.T(); ++i) {
    MatX3 diff = x.frames[i].positions - x_tilde.frames[i].positions;
    for (int k = 0; k < m; ++k) {
      if (w[k] == 0.0) diff.row(k).setZero();
    }
    const MatX3 deformed = L.L * diff;
    cost += (deformed.rowwise().squaredNorm().array() * w.array()).sum() / m;
  }
  return cost;
}

double combined_distance(const KeypointTrajectory& x, const KeypointTrajectory& x_tilde,
                         const LaplacianMatrix& L, const CostWeights& weights) {
  if (weights.w_p < 0.0 || weights.w_l < 0.0 || (weights.w_p == 0.0 && weights.w_l == 0.0)) {
    throw InvariantError("cost weights must be non-negative and not both zero");
  }
  double d = 0.0;
  if (weights.w_p > 0.0) d += weights.w_p * spatial_cost(x, x_tilde, weights.keypoint_weights);
  if (weights.w_l > 0.0) {
    d += weights.w_l * laplacian_cost(x, x_tilde, L, weights.keypoint_weights);
  }
  return d;
}

double per_keypoint_laplacian_error(const KeypointTrajectory& x,
                                    const KeypointTrajectory& x_tilde,
                                    const LaplacianMatrix& L, int t, int k) {
  check_shapes(x, x_tilde);
  if (t < 0 || t >= x.T()) {
    throw DimensionError("frame index " + std::to_string(t) + " out of range");
  }
  if (k < 0 || k >= x.m()) {
    throw DimensionError("keypoint index " + std::to_string(k) + " out of range");
  }
  const MatX3 diff = x.frames[t].positions - x_tilde.frames[t].positions;
  return (L.L.row(k) * diff).norm();
}

}  // namespace retarget
