#include "retarget/ik.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

namespace retarget {

std::vector<int> resolve_keypoint_map(const RobotModel& model,
                                      const std::vector<std::string>& reference_names,
                                      const std::map<std::string, std::string>& name_map) {
  std::vector<int> map(model.num_keypoints(), -1);
  if (reference_names.empty()) {
    if (!name_map.empty()) {
      throw DimensionError("keypoint name map given but the reference carries no names");
    }
    // unnamed reference: positional identity
    for (int k = 0; k < model.num_keypoints(); ++k) map[k] = k;
    return map;
  }
  auto reference_index = [&](const std::string& name) {
    for (int i = 0; i < static_cast<int>(reference_names.size()); ++i) {
      if (reference_names[i] == name) return i;
    }
    return -1;
  };
  if (name_map.empty()) {
    for (int k = 0; k < model.num_keypoints(); ++k) {
      map[k] = reference_index(model.keypoints[k].name);
    }
    return map;
  }
  for (const auto& [ref_name, model_name] : name_map) {
    const int ref = reference_index(ref_name);
    if (ref < 0) {
      throw DimensionError("reference keypoint '" + ref_name + "' not found");
    }
    const auto model_kp = model.keypoint_index(model_name);
    if (!model_kp) {
      throw DimensionError("model keypoint '" + model_name + "' not found");
    }
    map[*model_kp] = ref;
  }
  return map;
}

namespace {

struct FrameProblem {
  const RobotModel& model;
  const LaplacianMatrix& L;
  MatX3 targets;   // per model keypoint; zero rows where unmapped
  VecX weights;    // effective per-keypoint weights (0 = unmapped)
  double w_p;
  double w_l;
  double w_ground;
};

// Objective: w_p sum_k w_k |p_k - t_k|^2 + (w_l/m) sum_k w_k |(L D)_k|^2
//            + w_g sum_k max(0, -p_kz)^2, with D rows zeroed at w_k = 0.
double frame_cost(const FrameProblem& fp, const MatX3& positions) {
  const int m = fp.model.num_keypoints();
  MatX3 diff = positions - fp.targets;
  for (int k = 0; k < m; ++k) {
    if (fp.weights[k] == 0.0) diff.row(k).setZero();
  }
  double cost = fp.w_p * (diff.rowwise().squaredNorm().array() * fp.weights.array()).sum();
  if (fp.w_l > 0.0) {
    const MatX3 deformed = fp.L.L * diff;
    cost += fp.w_l / m *
            (deformed.rowwise().squaredNorm().array() * fp.weights.array()).sum();
  }
  if (fp.w_ground > 0.0) {
    for (int k = 0; k < m; ++k) {
      const double below = std::max(0.0, -positions(k, 2));
      cost += fp.w_ground * below * below;
    }
  }
  return cost;
}

// Stacks residual r with cost = |r|^2 and its Jacobian at q.
void frame_residual(const FrameProblem& fp, const Configuration& q, VecX& r, MatX& J) {
  const RobotModel& model = fp.model;
  const int m = model.num_keypoints();
  const int nv = model.nv();
  const MatX3 positions = keypoint_positions(model, q).positions;
  const auto jacobians = keypoint_jacobians(model, q);

  const int rows = 3 * m + (fp.w_l > 0.0 ? 3 * m : 0) + (fp.w_ground > 0.0 ? m : 0);
  r.setZero(rows);
  J.setZero(rows, nv);

  MatX3 diff = positions - fp.targets;
  for (int k = 0; k < m; ++k) {
    if (fp.weights[k] == 0.0) diff.row(k).setZero();
  }

  for (int k = 0; k < m; ++k) {
    const double s = std::sqrt(fp.w_p * fp.weights[k]);
    if (s == 0.0) continue;
    r.segment<3>(3 * k) = s * diff.row(k).transpose();
    J.middleRows<3>(3 * k) = s * jacobians[k];
  }

  int row = 3 * m;
  if (fp.w_l > 0.0) {
    const MatX3 deformed = fp.L.L * diff;
    for (int k = 0; k < m; ++k) {
      const double s = std::sqrt(fp.w_l * fp.weights[k] / m);
      if (s == 0.0) continue;
      r.segment<3>(row + 3 * k) = s * deformed.row(k).transpose();
      for (int j = 0; j < m; ++j) {
        if (fp.L.L(k, j) == 0.0 || fp.weights[j] == 0.0) continue;
        J.middleRows<3>(row + 3 * k) += s * fp.L.L(k, j) * jacobians[j];
      }
    }
    row += 3 * m;
  }

  if (fp.w_ground > 0.0) {
    const double s = std::sqrt(fp.w_ground);
    for (int k = 0; k < m; ++k) {
      if (positions(k, 2) < 0.0) {
        r[row + k] = s * (-positions(k, 2));
        J.row(row + k) = -s * jacobians[k].row(2);
      }
    }
  }
}

void clamp_joints(const RobotModel& model, Configuration& q) {
  for (int j = 0; j < model.num_joints(); ++j) {
    q.joints[j] = std::clamp(q.joints[j], model.joint_limits[j].lower,
                             model.joint_limits[j].upper);
  }
}

// Mid-limit-range stance: keeps the warm start away from full-extension
// singularities, where the zero pose is a stationary point of the objective.
Configuration ik_seed(const RobotModel& model) {
  Configuration q = zero_configuration(model);
  for (int j = 0; j < model.num_joints(); ++j) {
    q.joints[j] = 0.5 * (model.joint_limits[j].lower + model.joint_limits[j].upper);
  }
  return project_to_ground(model, q);
}

// Damped least squares on one frame; returns the best iterate.
Configuration solve_frame(const FrameProblem& fp, Configuration q, const IkOptions& opts,
                          double& final_cost, int& steps, std::vector<double>* trace) {
  const int nv = fp.model.nv();
  clamp_joints(fp.model, q);
  double cost = frame_cost(fp, keypoint_positions(fp.model, q).positions);
  if (trace) trace->push_back(cost);
  steps = 0;

  VecX r;
  MatX J;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    frame_residual(fp, q, r, J);
    const MatX H = J.transpose() * J + opts.damping * MatX::Identity(nv, nv);
    const VecX du = H.ldlt().solve(-J.transpose() * r);

    double scale = 1.0;
    bool accepted = false;
    Configuration q_try;
    double cost_try = cost;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt) {
      q_try = integrate(q, du, scale);
      clamp_joints(fp.model, q_try);
      cost_try = frame_cost(fp, keypoint_positions(fp.model, q_try).positions);
      if (cost_try <= cost) {
        accepted = true;
        break;
      }
      scale *= 0.5;
    }
    if (!accepted) break;

    const double change = std::sqrt(cost) - std::sqrt(cost_try);
    q = q_try;
    cost = cost_try;
    ++steps;
    if (trace) trace->push_back(cost);
    if (change < opts.residual_tolerance) break;
  }
  final_cost = cost;
  return q;
}

}  // namespace

Trajectory geometric_retarget(const RobotModel& model, const KeypointTrajectory& x_ref,
                              const IkOptions& opts, IkDiagnostics* diagnostics) {
  if (x_ref.T() < 1) throw DimensionError("reference keypoint trajectory is empty");
  const std::vector<int> map = resolve_keypoint_map(model, x_ref.names, opts.name_map);
  const int m = model.num_keypoints();

  VecX weights;
  if (opts.weights.keypoint_weights.size() == 0) {
    weights = VecX::Ones(m);
  } else if (opts.weights.keypoint_weights.size() == m) {
    weights = opts.weights.keypoint_weights;
  } else {
    throw DimensionError("keypoint weight vector has size " +
                         std::to_string(opts.weights.keypoint_weights.size()) +
                         ", expected " + std::to_string(m));
  }
  bool any = false;
  for (int k = 0; k < m; ++k) {
    if (map[k] < 0) {
      weights[k] = 0.0;
    } else if (map[k] >= x_ref.m()) {
      throw DimensionError("keypoint map exceeds reference width");
    }
    any = any || weights[k] > 0.0;
  }
  if (!any) throw DimensionError("no reference keypoint maps to the model");

  const LaplacianMatrix L = build_laplacian(model.keypoint_adjacency, m);
  FrameProblem fp{model,
                  L,
                  MatX3::Zero(m, 3),
                  weights,
                  opts.weights.w_p,
                  opts.weights.w_l,
                  opts.ground_penalty ? opts.ground_penalty_weight : 0.0};

  Trajectory out;
  out.dt = x_ref.dt;
  out.states.reserve(x_ref.T());
  if (diagnostics) *diagnostics = {};

  Configuration q = opts.initial ? *opts.initial : ik_seed(model);
  check_configuration(model, q);
  for (int i = 0; i < x_ref.T(); ++i) {
    for (int k = 0; k < m; ++k) {
      if (map[k] >= 0) fp.targets.row(k) = x_ref.frames[i].positions.row(map[k]);
    }
    double cost = 0.0;
    int steps = 0;
    std::vector<double> trace;
    q = solve_frame(fp, q, opts, cost, steps, diagnostics ? &trace : nullptr);
    if (diagnostics) {
      diagnostics->residuals.push_back(cost);
      diagnostics->iterations.push_back(steps);
      diagnostics->cost_trace.push_back(std::move(trace));
    }
    out.states.push_back({q, VecX::Zero(model.nv())});
  }
  return out;
}

}  // namespace retarget
