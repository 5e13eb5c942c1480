#include "retarget/cem_mpc.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

namespace retarget {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t chain(std::uint64_t h, std::uint64_t v) { return splitmix64(h + v); }

void check_config(const CemConfig& cfg) {
  if (cfg.population < 1) throw InvariantError("population must be positive");
  if (cfg.elites < 1 || cfg.elites > cfg.population)
    throw InvariantError("elites must lie in [1, population]");
  if (cfg.iterations < 1) throw InvariantError("iterations must be positive");
  if (cfg.std_floor < 0.0) throw InvariantError("std_floor must be non-negative");
  if (cfg.mean_smoothing < 0.0 || cfg.mean_smoothing > 1.0)
    throw InvariantError("mean_smoothing must lie in [0, 1]");
}

MatX sample_knots(const MatX& mean, const MatX& std, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> unit;
  MatX knots(mean.rows(), mean.cols());
  for (int r = 0; r < knots.rows(); ++r)
    for (int c = 0; c < knots.cols(); ++c)
      knots(r, c) = mean(r, c) + std(r, c) * unit(rng);
  return knots;
}

double guarded_cost(const CemObjective& objective, const MatX& knots) {
  double cost;
  try {
    cost = objective(knots);
  } catch (const DynamicsError&) {
    return kInf;
  }
  return std::isfinite(cost) ? cost : kInf;
}

}  // namespace

int knot_count(int horizon, int knot_spacing) {
  if (horizon < 1) throw InvariantError("horizon must be positive");
  if (knot_spacing < 1) throw InvariantError("knot_spacing must be positive");
  return (horizon + knot_spacing - 1) / knot_spacing + 1;
}

MatX spline_to_controls(const MatX& knots, int horizon, int knot_spacing) {
  const int K = knot_count(horizon, knot_spacing);
  if (static_cast<int>(knots.rows()) != K)
    throw DimensionError("expected " + std::to_string(K) + " knot rows, got " +
                         std::to_string(knots.rows()));
  MatX controls(horizon, knots.cols());
  for (int i = 0; i < horizon; ++i) {
    const int k = i / knot_spacing;
    const double frac = static_cast<double>(i - k * knot_spacing) / knot_spacing;
    if (frac == 0.0) {
      controls.row(i) = knots.row(k);
    } else {
      controls.row(i) = (1.0 - frac) * knots.row(k) + frac * knots.row(k + 1);
    }
  }
  return controls;
}

MatX cem_optimize(const CemObjective& objective, const MatX& init_mean,
                  const MatX& init_std, const CemConfig& cfg, std::uint64_t stream,
                  CemDiagnostics* diagnostics) {
  check_config(cfg);
  if (init_mean.size() == 0) throw InvariantError("empty initial mean");
  if (init_mean.rows() != init_std.rows() || init_mean.cols() != init_std.cols())
    throw DimensionError("mean and std shapes differ");
  if ((init_std.array() < 0.0).any())
    throw InvariantError("initial std must be non-negative");

  int workers = cfg.workers;
  if (workers <= 0)
    workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, cfg.population);

  MatX mean = init_mean;
  MatX std_dev = init_std.cwiseMax(cfg.std_floor);
  MatX best_knots = mean;
  double best_cost = kInf;

  std::vector<MatX> samples(cfg.population);
  std::vector<double> costs(cfg.population);
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    const std::uint64_t iter_stream = chain(stream, static_cast<std::uint64_t>(iter));
    for (int s = 0; s < cfg.population; ++s)
      samples[s] =
          sample_knots(mean, std_dev, chain(iter_stream, static_cast<std::uint64_t>(s)));

    // Fixed sample-to-slot assignment keeps results independent of the
    // worker count; only the evaluation order varies.
    std::vector<std::exception_ptr> failures(workers);
    auto evaluate = [&](int w) {
      try {
        for (int s = w; s < cfg.population; s += workers)
          costs[s] = guarded_cost(objective, samples[s]);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    };
    if (workers == 1) {
      evaluate(0);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (int w = 0; w < workers; ++w) pool.emplace_back(evaluate, w);
      for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& failure : failures)
      if (failure) std::rethrow_exception(failure);
    if (diagnostics) diagnostics->evaluations += cfg.population;

    std::vector<int> order(cfg.population);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return costs[a] != costs[b] ? costs[a] < costs[b] : a < b;
    });
    if (costs[order[0]] == kInf)
      throw InvariantError("objective everywhere invalid");
    if (costs[order[0]] < best_cost) {
      best_cost = costs[order[0]];
      best_knots = samples[order[0]];
    }

    MatX elite_mean = MatX::Zero(mean.rows(), mean.cols());
    double elite_cost_sum = 0.0;
    int elite_count = 0;
    for (int e = 0; e < cfg.elites; ++e) {
      if (costs[order[e]] == kInf) break;  // never refit on invalid samples
      elite_mean += samples[order[e]];
      elite_cost_sum += costs[order[e]];
      ++elite_count;
    }
    elite_mean /= elite_count;
    MatX elite_var = MatX::Zero(mean.rows(), mean.cols());
    for (int e = 0; e < elite_count; ++e)
      elite_var += (samples[order[e]] - elite_mean).array().square().matrix();
    const MatX elite_std = (elite_var / elite_count).cwiseSqrt();

    const double alpha = cfg.mean_smoothing;
    mean = alpha * elite_mean + (1.0 - alpha) * mean;
    std_dev = (alpha * elite_std + (1.0 - alpha) * std_dev).cwiseMax(cfg.std_floor);

    if (diagnostics) {
      diagnostics->best_cost.push_back(best_cost);
      diagnostics->elite_mean_cost.push_back(elite_cost_sum / elite_count);
      diagnostics->std_norm.push_back(std_dev.norm());
    }
  }
  return best_knots;
}

PlanResult plan_receding_horizon(const RobotModel& model,
                                 const KeypointTrajectory& x_target,
                                 const Configuration& q0, const LaplacianMatrix& L,
                                 const CostWeights& weights, const CemConfig& cem,
                                 const DynamicsParams& dyn) {
  const int T = x_target.T();
  const int n = model.num_joints();
  if (T < 1) throw InvariantError("target trajectory is empty");
  if (x_target.dt <= 0.0) throw InvariantError("target dt must be positive");
  if (x_target.m() != model.num_keypoints())
    throw DimensionError("target has " + std::to_string(x_target.m()) +
                         " keypoints, model has " +
                         std::to_string(model.num_keypoints()));
  if (q0.n_q() != n)
    throw DimensionError("initial configuration has " + std::to_string(q0.n_q()) +
                         " joints, model has " + std::to_string(n));
  if (cem.horizon < 1) throw InvariantError("horizon must be positive");
  if (cem.replan_stride < 1) throw InvariantError("replan_stride must be positive");

  const int H = cem.horizon;
  const int K = knot_count(H, cem.knot_spacing);
  const double dt = x_target.dt;
  const auto started = std::chrono::steady_clock::now();

  PlanResult result;
  result.trajectory.dt = dt;
  result.trajectory.states.push_back({q0, VecX::Zero(model.nv())});
  result.controls.dt = dt;
  result.controls.controls.resize(T, n);

  // Torque samples explore around zero, PD targets around the current pose.
  MatX mean = MatX::Zero(K, n);
  if (dyn.mode == ControlMode::PdTarget)
    mean = q0.joints.transpose().replicate(K, 1);
  const MatX init_std = MatX::Constant(K, n, cem.init_std);

  State current{q0, VecX::Zero(model.nv())};
  int replan = 0;
  for (int t0 = 0; t0 < T; t0 += cem.replan_stride, ++replan) {
    KeypointTrajectory window;
    window.dt = dt;
    window.names = x_target.names;
    window.adjacency = x_target.adjacency;
    window.frames.reserve(H);
    for (int j = 0; j < H; ++j)
      window.frames.push_back(x_target.frames[std::min(t0 + j, T - 1)]);

    const auto objective = [&](const MatX& knots) {
      const ControlSequence U{spline_to_controls(knots, H, cem.knot_spacing), dt};
      const Trajectory roll = rollout_from(model, current, U, dyn);
      KeypointTrajectory x_roll;
      x_roll.dt = dt;
      x_roll.frames.reserve(H);
      for (int j = 0; j < H; ++j)
        x_roll.frames.push_back(keypoint_positions(model, roll.states[j + 1].q));
      return combined_distance(x_roll, window, L, weights) +
             cem.effort_weight * U.controls.squaredNorm();
    };

    CemDiagnostics diag;
    const MatX best = cem_optimize(objective, mean, init_std, cem,
                                   chain(cem.seed, static_cast<std::uint64_t>(replan)),
                                   &diag);
    const MatX best_controls = spline_to_controls(best, H, cem.knot_spacing);

    const int executed = std::min(cem.replan_stride, T - t0);
    const ControlSequence U_exec{best_controls.topRows(executed), dt};
    const Trajectory segment = rollout_from(model, current, U_exec, dyn);
    for (int i = 1; i <= executed; ++i)
      result.trajectory.states.push_back(segment.states[i]);
    result.controls.controls.middleRows(t0, executed) = U_exec.controls;
    current = segment.states.back();

    // Warm start: the best plan's spline shifted by the executed stride,
    // resampled at the knot indices.
    for (int k = 0; k < K; ++k) {
      const int idx = std::min(k * cem.knot_spacing + executed, H - 1);
      mean.row(k) = best_controls.row(idx);
    }

    result.diagnostics.best_cost.push_back(diag.best_cost.back());
    result.diagnostics.elite_mean_cost.push_back(diag.elite_mean_cost.back());
    result.diagnostics.std_norm.push_back(diag.std_norm.back());
    result.diagnostics.best_cost_curve.push_back(diag.best_cost);
    result.diagnostics.total_rollouts += diag.evaluations;
  }
  result.diagnostics.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started)
          .count();
  return result;
}

}  // namespace retarget
