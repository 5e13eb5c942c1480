#include "retarget/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "retarget/fixtures.hpp"
#include "retarget/svg_plot.hpp"

namespace retarget {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr const char* kMethods[] = {"gr", "idr", "ddr"};

bool known_method(const std::string& method) {
  for (const char* m : kMethods)
    if (method == m) return true;
  return false;
}

double json_safe(double v) {
  return std::isfinite(v) ? v : 0.0;
}

Json json_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

// ---------------------------------------------------------------- config --

std::vector<std::string> tokenize(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (in >> tok) tokens.push_back(tok);
  return tokens;
}

[[noreturn]] void config_fail(int number, const std::string& message) {
  throw ParseError("line " + std::to_string(number) + ": " + message);
}

double config_double(int number, const std::string& tok) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size())
    config_fail(number, "expected a number, got '" + tok + "'");
  return v;
}

int config_int(int number, const std::string& tok) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size())
    config_fail(number, "expected an integer, got '" + tok + "'");
  return static_cast<int>(v);
}

void apply_config_line(PipelineConfig& c, int number,
                       const std::vector<std::string>& t) {
  const std::string& key = t[0];
  const size_t args = t.size() - 1;
  auto need = [&](size_t n) {
    if (args != n)
      config_fail(number, "key '" + key + "' takes " + std::to_string(n) +
                              " value(s), got " + std::to_string(args));
  };
  if (key == "model") { need(1); c.model_path = t[1]; }
  else if (key == "reference") { need(1); c.reference_path = t[1]; }
  else if (key == "labels") { need(1); c.labels_path = t[1]; }
  else if (key == "method") { need(1); c.method = t[1]; }
  else if (key == "out_dir") { need(1); c.out_dir = t[1]; }
  else if (key == "profile") { need(1); apply_profile(c, t[1]); }
  else if (key == "seeds") {
    if (args == 0) config_fail(number, "key 'seeds' needs at least one value");
    c.seeds.clear();
    for (size_t i = 1; i < t.size(); ++i)
      c.seeds.push_back(static_cast<std::uint64_t>(config_int(number, t[i])));
  } else if (key == "keypoint_weights") {
    c.weights.keypoint_weights.resize(static_cast<int>(args));
    for (size_t i = 1; i < t.size(); ++i)
      c.weights.keypoint_weights[static_cast<int>(i - 1)] =
          config_double(number, t[i]);
  } else if (key == "map") {
    need(2);
    c.keypoint_map[t[1]] = t[2];
  }
  else if (key == "w_p") { need(1); c.weights.w_p = config_double(number, t[1]); }
  else if (key == "w_l") { need(1); c.weights.w_l = config_double(number, t[1]); }
  else if (key == "contact_threshold") { need(1); c.contact_threshold = config_double(number, t[1]); }
  else if (key == "success_threshold") { need(1); c.success_threshold = config_double(number, t[1]); }
  else if (key == "eps_dyn") { need(1); c.tolerances.eps_dyn = config_double(number, t[1]); }
  else if (key == "anchored_base") { need(1); c.tolerances.anchored_base = config_int(number, t[1]) != 0; }
  else if (key == "ik_damping") { need(1); c.ik.damping = config_double(number, t[1]); }
  else if (key == "ik_max_iterations") { need(1); c.ik.max_iterations = config_int(number, t[1]); }
  else if (key == "ik_tolerance") { need(1); c.ik.residual_tolerance = config_double(number, t[1]); }
  else if (key == "ik_max_backtracks") { need(1); c.ik.max_backtracks = config_int(number, t[1]); }
  else if (key == "ik_ground_penalty") { need(1); c.ik.ground_penalty = config_int(number, t[1]) != 0; }
  else if (key == "ik_ground_penalty_weight") { need(1); c.ik.ground_penalty_weight = config_double(number, t[1]); }
  else if (key == "cem_population") { need(1); c.cem.population = config_int(number, t[1]); }
  else if (key == "cem_elites") { need(1); c.cem.elites = config_int(number, t[1]); }
  else if (key == "cem_iterations") { need(1); c.cem.iterations = config_int(number, t[1]); }
  else if (key == "cem_init_std") { need(1); c.cem.init_std = config_double(number, t[1]); }
  else if (key == "cem_std_floor") { need(1); c.cem.std_floor = config_double(number, t[1]); }
  else if (key == "cem_mean_smoothing") { need(1); c.cem.mean_smoothing = config_double(number, t[1]); }
  else if (key == "cem_knot_spacing") { need(1); c.cem.knot_spacing = config_int(number, t[1]); }
  else if (key == "cem_horizon") { need(1); c.cem.horizon = config_int(number, t[1]); }
  else if (key == "cem_replan_stride") { need(1); c.cem.replan_stride = config_int(number, t[1]); }
  else if (key == "cem_workers") { need(1); c.cem.workers = config_int(number, t[1]); }
  else if (key == "cem_effort_weight") { need(1); c.cem.effort_weight = config_double(number, t[1]); }
  else if (key == "dyn_mode") {
    need(1);
    if (t[1] == "torque") c.dynamics.mode = ControlMode::Torque;
    else if (t[1] == "pd_target") c.dynamics.mode = ControlMode::PdTarget;
    else config_fail(number, "dyn_mode must be torque or pd_target, got '" + t[1] + "'");
  }
  else if (key == "dyn_kp") { need(1); c.dynamics.kp = config_double(number, t[1]); }
  else if (key == "dyn_kd") { need(1); c.dynamics.kd = config_double(number, t[1]); }
  else if (key == "dyn_substeps") { need(1); c.dynamics.substeps = config_int(number, t[1]); }
  else if (key == "contact_stiffness") { need(1); c.dynamics.contact.stiffness = config_double(number, t[1]); }
  else if (key == "contact_damping") { need(1); c.dynamics.contact.damping = config_double(number, t[1]); }
  else if (key == "contact_ground") { need(1); c.dynamics.contact.ground_height = config_double(number, t[1]); }
  else if (key == "contact_reg_velocity") { need(1); c.dynamics.contact.regularization_velocity = config_double(number, t[1]); }
  else config_fail(number, "unknown key '" + key + "'");
}

}  // namespace

void apply_profile(PipelineConfig& config, const std::string& profile) {
  if (profile == "fast") {
    config.cem.population = 32;
    config.cem.elites = 6;
    config.cem.iterations = 3;
    config.cem.horizon = 10;
    config.cem.replan_stride = 5;
  } else if (profile == "thorough") {
    config.cem.population = 64;
    config.cem.elites = 8;
    config.cem.iterations = 5;
    config.cem.horizon = 15;
    config.cem.replan_stride = 2;
  } else {
    throw InvariantError("unknown profile '" + profile + "': expected fast or thorough");
  }
  // Desk-scale planning defaults shared by both profiles: position-target
  // control with low sampling spread keeps rollouts in double support, which
  // the small feet demand.
  config.cem.init_std = 0.05;
  config.cem.std_floor = 0.002;
  config.cem.mean_smoothing = 1.0;
  config.cem.knot_spacing = 5;
  config.cem.effort_weight = 1e-3;
  config.dynamics.mode = ControlMode::PdTarget;
}

void apply_pipeline_config(PipelineConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::vector<std::string> tokens = tokenize(line);
    if (tokens.empty()) continue;
    apply_config_line(config, number, tokens);
  }
}

PipelineConfig load_pipeline_config(const std::string& text) {
  PipelineConfig config;
  apply_pipeline_config(config, text);
  return config;
}

std::string serialize_pipeline_config(const PipelineConfig& c) {
  std::ostringstream out;
  out << "model " << c.model_path << "\n";
  out << "reference " << c.reference_path << "\n";
  if (!c.labels_path.empty()) out << "labels " << c.labels_path << "\n";
  out << "method " << c.method << "\n";
  out << "seeds";
  for (std::uint64_t s : c.seeds) out << " " << s;
  out << "\n";
  out << "out_dir " << c.out_dir << "\n";
  out << "w_p " << format_double(c.weights.w_p) << "\n";
  out << "w_l " << format_double(c.weights.w_l) << "\n";
  if (c.weights.keypoint_weights.size() > 0) {
    out << "keypoint_weights";
    for (int i = 0; i < c.weights.keypoint_weights.size(); ++i)
      out << " " << format_double(c.weights.keypoint_weights[i]);
    out << "\n";
  }
  for (const auto& [ref, mod] : c.keypoint_map)
    out << "map " << ref << " " << mod << "\n";
  out << "contact_threshold " << format_double(c.contact_threshold) << "\n";
  out << "success_threshold " << format_double(c.success_threshold) << "\n";
  out << "eps_dyn " << format_double(c.tolerances.eps_dyn) << "\n";
  out << "anchored_base " << (c.tolerances.anchored_base ? 1 : 0) << "\n";
  out << "ik_damping " << format_double(c.ik.damping) << "\n";
  out << "ik_max_iterations " << c.ik.max_iterations << "\n";
  out << "ik_tolerance " << format_double(c.ik.residual_tolerance) << "\n";
  out << "ik_max_backtracks " << c.ik.max_backtracks << "\n";
  out << "ik_ground_penalty " << (c.ik.ground_penalty ? 1 : 0) << "\n";
  out << "ik_ground_penalty_weight " << format_double(c.ik.ground_penalty_weight) << "\n";
  out << "cem_population " << c.cem.population << "\n";
  out << "cem_elites " << c.cem.elites << "\n";
  out << "cem_iterations " << c.cem.iterations << "\n";
  out << "cem_init_std " << format_double(c.cem.init_std) << "\n";
  out << "cem_std_floor " << format_double(c.cem.std_floor) << "\n";
  out << "cem_mean_smoothing " << format_double(c.cem.mean_smoothing) << "\n";
  out << "cem_knot_spacing " << c.cem.knot_spacing << "\n";
  out << "cem_horizon " << c.cem.horizon << "\n";
  out << "cem_replan_stride " << c.cem.replan_stride << "\n";
  out << "cem_workers " << c.cem.workers << "\n";
  out << "cem_effort_weight " << format_double(c.cem.effort_weight) << "\n";
  out << "dyn_mode " << (c.dynamics.mode == ControlMode::Torque ? "torque" : "pd_target") << "\n";
  out << "dyn_kp " << format_double(c.dynamics.kp) << "\n";
  out << "dyn_kd " << format_double(c.dynamics.kd) << "\n";
  out << "dyn_substeps " << c.dynamics.substeps << "\n";
  out << "contact_stiffness " << format_double(c.dynamics.contact.stiffness) << "\n";
  out << "contact_damping " << format_double(c.dynamics.contact.damping) << "\n";
  out << "contact_ground " << format_double(c.dynamics.contact.ground_height) << "\n";
  out << "contact_reg_velocity " << format_double(c.dynamics.contact.regularization_velocity) << "\n";
  return out.str();
}

std::string run_id(const PipelineConfig& config) {
  const std::string text = serialize_pipeline_config(config);
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

RobotModel resolve_model(const std::string& model_path) {
  const std::string prefix = "builtin:";
  if (model_path.rfind(prefix, 0) == 0) {
    const std::string name = model_path.substr(prefix.size());
    if (name == "mini_humanoid") return models::mini_humanoid();
    if (name == "planar_biped") return models::planar_biped();
    throw InvariantError("unknown builtin model '" + name +
                         "': expected mini_humanoid or planar_biped");
  }
  return load_model_file(model_path);
}

KeypointTrajectory resolve_reference(const std::string& reference_path) {
  const std::string prefix = "fixture:";
  if (reference_path.rfind(prefix, 0) == 0)
    return fixture_by_name(reference_path.substr(prefix.size())).reference;
  return load_keypoints_file(reference_path);
}

namespace {

// ------------------------------------------------------------- execution --

// Reference rows reordered to the model's keypoint list. Model keypoints
// without a matching reference row get weight zero (and a zero row).
struct MappedReference {
  KeypointTrajectory x;
  VecX weights;
};

MappedReference map_reference(const RobotModel& model, const KeypointTrajectory& ref,
                              const std::map<std::string, std::string>& name_map,
                              const CostWeights& weights) {
  if (weights.keypoint_weights.size() > 0 &&
      weights.keypoint_weights.size() != static_cast<int>(ref.names.size()))
    throw DimensionError("keypoint_weights has " +
                         std::to_string(weights.keypoint_weights.size()) +
                         " entries, reference has " + std::to_string(ref.names.size()));
  std::map<std::string, int> ref_row;
  for (size_t r = 0; r < ref.names.size(); ++r) {
    std::string name = ref.names[r];
    auto mapped = name_map.find(name);
    if (mapped != name_map.end()) name = mapped->second;
    ref_row[name] = static_cast<int>(r);
  }
  const int m = static_cast<int>(model.keypoints.size());
  MappedReference out;
  out.weights = VecX::Zero(m);
  out.x.dt = ref.dt;
  out.x.adjacency = model.keypoint_adjacency;
  for (const Keypoint& kp : model.keypoints) out.x.names.push_back(kp.name);
  out.x.frames.resize(ref.frames.size());
  for (size_t t = 0; t < ref.frames.size(); ++t)
    out.x.frames[t].positions = MatX3::Zero(m, 3);
  for (int k = 0; k < m; ++k) {
    auto row = ref_row.find(model.keypoints[k].name);
    if (row == ref_row.end()) continue;
    out.weights[k] = weights.keypoint_weights.size() > 0
                         ? weights.keypoint_weights[row->second]
                         : 1.0;
    for (size_t t = 0; t < ref.frames.size(); ++t)
      out.x.frames[t].positions.row(k) = ref.frames[t].positions.row(row->second);
  }
  return out;
}

std::vector<Configuration> aligned_configurations(const std::string& method,
                                                  const Trajectory& trajectory) {
  std::vector<Configuration> qs = configurations(trajectory);
  // planner trajectories carry the initial state; state i+1 tracks frame i
  if (method != "gr" && !qs.empty()) qs.erase(qs.begin());
  return qs;
}

ContactSequence resolve_labels(const PipelineConfig& config) {
  if (!config.labels_path.empty()) return load_contacts_file(config.labels_path);
  const std::string prefix = "fixture:";
  if (config.reference_path.rfind(prefix, 0) == 0)
    return fixture_by_name(config.reference_path.substr(prefix.size())).truth_contacts;
  return {};
}

int pelvis_row(const std::vector<std::string>& names) {
  for (size_t k = 0; k < names.size(); ++k)
    if (names[k] == "pelvis") return static_cast<int>(k);
  return -1;
}

MatX3 keypoint_track(const KeypointTrajectory& x, int k) {
  MatX3 rows(x.T(), 3);
  for (int t = 0; t < x.T(); ++t) rows.row(t) = x.frames[t].positions.row(k);
  return rows;
}

Json metrics_json(const MetricsReport& m) {
  Json j;
  j["contact_error_rate"] = json_safe(m.contact_error_rate);
  j["success"] = m.success;
  j["joints_rmse"] = json_safe(m.joints_rmse);
  j["mean_position_error"] = json_safe(m.mean_position_error);
  j["mean_laplacian_error"] = json_safe(m.mean_laplacian_error);
  j["foot_slip"] = json_safe(m.foot_slip);
  return j;
}

MetricsReport metrics_from_json(const Json& j) {
  MetricsReport m;
  m.contact_error_rate = j.at("contact_error_rate").get<double>();
  m.success = j.at("success").get<bool>();
  m.joints_rmse = j.at("joints_rmse").get<double>();
  m.mean_position_error = j.at("mean_position_error").get<double>();
  m.mean_laplacian_error = j.at("mean_laplacian_error").get<double>();
  m.foot_slip = j.at("foot_slip").get<double>();
  return m;
}

Json feasibility_json(const FeasibilityReport& r) {
  Json j;
  j["infeasible_fraction"] = r.infeasible_fraction;
  j["worst_residual"] = r.worst_residual;
  j["worst_timestep"] = r.worst_timestep;
  j["indeterminate_count"] = r.indeterminate_count;
  j["frames"] = r.verdicts.size();
  Json rows = Json::array();
  for (const FeasibilityVerdict& v : r.verdicts) {
    Json row;
    row["feasible"] = v.feasible;
    row["indeterminate"] = v.indeterminate;
    row["residual"] = v.residual;
    row["torque_margin"] = json_or_null(v.torque_margin);
    row["cone_margin"] = json_or_null(v.cone_margin);
    rows.push_back(row);
  }
  j["verdicts"] = rows;
  return j;
}

Json aggregate_json(const AggregateReport& a,
                    const std::vector<double>& infeasible_fractions) {
  auto value = [](const AggregateValue& v) {
    Json j;
    j["mean"] = v.mean;
    j["std"] = v.std;
    return j;
  };
  double mean = 0.0, sq = 0.0;
  for (double f : infeasible_fractions) mean += f;
  if (!infeasible_fractions.empty()) mean /= static_cast<double>(infeasible_fractions.size());
  for (double f : infeasible_fractions) sq += (f - mean) * (f - mean);
  Json j;
  Json inf;
  inf["mean"] = infeasible_fractions.empty() ? 0.0 : mean;
  inf["std"] = infeasible_fractions.empty()
                   ? 0.0
                   : std::sqrt(sq / static_cast<double>(infeasible_fractions.size()));
  j["infeasible_fraction"] = inf;
  j["contact_error_rate"] = value(a.contact_error_rate);
  j["joints_rmse"] = value(a.joints_rmse);
  j["mean_position_error"] = value(a.mean_position_error);
  j["mean_laplacian_error"] = value(a.mean_laplacian_error);
  j["foot_slip"] = value(a.foot_slip);
  j["success_rate"] = a.success_rate;
  j["count"] = a.count;
  return j;
}

Json plan_diagnostics_json(const PlanDiagnostics& d) {
  Json j;
  j["best_cost"] = d.best_cost;
  j["elite_mean_cost"] = d.elite_mean_cost;
  j["std_norm"] = d.std_norm;
  j["best_cost_curve"] = d.best_cost_curve;
  j["wall_time_s"] = d.wall_time_s;
  j["total_rollouts"] = d.total_rollouts;
  return j;
}

Json ik_diagnostics_json(const IkDiagnostics& d) {
  Json j;
  j["residuals"] = d.residuals;
  j["iterations"] = d.iterations;
  return j;
}

}  // namespace

RunResult run(const PipelineConfig& config) {
  if (!known_method(config.method))
    throw InvariantError("unknown method '" + config.method +
                         "': expected gr, idr, or ddr");
  if (config.seeds.empty()) throw InvariantError("no seeds given");
  if (config.reference_path.empty()) throw InvariantError("no reference given");

  RobotModel model = resolve_model(config.model_path);
  const KeypointTrajectory raw_reference = resolve_reference(config.reference_path);
  const MappedReference mapped =
      map_reference(model, raw_reference, config.keypoint_map, config.weights);
  const KeypointTrajectory& reference = mapped.x;
  const LaplacianMatrix L = build_laplacian(reference.adjacency, reference.m());

  CostWeights weights = config.weights;
  weights.keypoint_weights = mapped.weights;

  IkOptions ik = config.ik;
  ik.weights = weights;  // model-indexed, like the planner's
  ik.name_map = config.keypoint_map;

  DynamicsParams dynamics = config.dynamics;
  dynamics.contact.friction = model.friction;  // one cone for sim and checker

  ContactSequence labels = resolve_labels(config);

  RunResult result;
  result.id = run_id(config);
  result.dir = (fs::path(config.out_dir) / (config.method + "-" + result.id)).string();
  fs::create_directories(result.dir);
  write_file((fs::path(result.dir) / "config.txt").string(),
             serialize_pipeline_config(config));
  if (labels.T() > 0)
    write_file((fs::path(result.dir) / "labels.txt").string(),
               serialize_contacts(labels));

  // the geometric fit doubles as the joint-space baseline for tracking
  // metrics and as the target of idr
  IkDiagnostics gr_diag;
  const Trajectory gr = geometric_retarget(model, raw_reference, ik, &gr_diag);
  const std::vector<Configuration> gr_configs = configurations(gr);
  const KeypointTrajectory gr_fk = fk_configurations(model, gr_configs, reference.dt);

  std::vector<std::uint64_t> seeds = config.seeds;
  if (config.method == "gr" && seeds.size() > 1) {
    std::fprintf(stderr,
                 "method gr is deterministic; ignoring %zu extra seeds\n",
                 seeds.size() - 1);
    seeds.resize(1);
  }

  const Configuration q0 = default_stance(model);
  std::vector<MetricsReport> per_seed_metrics;
  std::vector<double> infeasible_fractions;

  for (std::uint64_t seed : seeds) {
    SeedResult sr;
    sr.seed = seed;
    sr.dir = (fs::path(result.dir) / ("seed-" + std::to_string(seed))).string();
    fs::create_directories(sr.dir);

    if (config.method == "gr") {
      sr.trajectory = gr;
      sr.ik = gr_diag;
    } else {
      const KeypointTrajectory& target = config.method == "ddr" ? reference : gr_fk;
      CemConfig cem = config.cem;
      cem.seed = seed;
      PlanResult plan = plan_receding_horizon(model, target, q0, L, weights, cem, dynamics);
      sr.trajectory = std::move(plan.trajectory);
      sr.plan = std::move(plan.diagnostics);
    }

    const std::vector<Configuration> aligned =
        aligned_configurations(config.method, sr.trajectory);
    sr.keypoints = fk_configurations(model, aligned, reference.dt);
    sr.contacts = estimate_contacts(model, aligned, reference.dt, config.contact_threshold);
    sr.feasibility = check_trajectory_feasibility(model, aligned, reference.dt,
                                                  config.contact_threshold,
                                                  config.tolerances);

    const TrackingErrors errors =
        tracking_errors(aligned, gr_configs, sr.keypoints, reference, L);
    sr.metrics.joints_rmse = errors.joints_rmse;
    sr.metrics.mean_position_error = errors.mean_position_error;
    sr.metrics.mean_laplacian_error = errors.mean_laplacian_error;
    sr.metrics.contact_error_rate =
        labels.T() > 0 ? contact_error_rate(sr.contacts, labels) : 0.0;
    const int pelvis = pelvis_row(reference.names);
    sr.metrics.success =
        pelvis < 0 || success(keypoint_track(sr.keypoints, pelvis),
                              keypoint_track(reference, pelvis),
                              config.success_threshold);
    sr.metrics.foot_slip = foot_slip(model, aligned, sr.contacts);

    write_file((fs::path(sr.dir) / "trajectory.txt").string(),
               serialize_trajectory(to_document(model, sr.trajectory)));
    write_file((fs::path(sr.dir) / "keypoints.txt").string(),
               serialize_keypoints(sr.keypoints));
    write_file((fs::path(sr.dir) / "contacts.txt").string(),
               serialize_contacts(sr.contacts));
    write_file((fs::path(sr.dir) / "metrics.json").string(),
               metrics_json(sr.metrics).dump(2) + "\n");
    write_file((fs::path(sr.dir) / "feasibility.json").string(),
               feasibility_json(sr.feasibility).dump(2) + "\n");
    Json diag;
    diag["method"] = config.method;
    if (config.method == "gr") diag["ik"] = ik_diagnostics_json(sr.ik);
    else diag["plan"] = plan_diagnostics_json(sr.plan);
    write_file((fs::path(sr.dir) / "diagnostics.json").string(), diag.dump(2) + "\n");

    per_seed_metrics.push_back(sr.metrics);
    infeasible_fractions.push_back(sr.feasibility.infeasible_fraction);
    result.seeds.push_back(std::move(sr));
  }

  result.aggregate = aggregate_seeds(per_seed_metrics);
  write_file((fs::path(result.dir) / "aggregate.json").string(),
             aggregate_json(result.aggregate, infeasible_fractions).dump(2) + "\n");
  return result;
}

namespace {

struct LoadedRun {
  std::string dir;
  PipelineConfig config;
  std::vector<std::string> seed_dirs;  // sorted by seed
  std::vector<MetricsReport> metrics;
  std::vector<double> infeasible_fractions;
};

LoadedRun load_run_dir(const std::string& dir) {
  LoadedRun run;
  run.dir = dir;
  const fs::path root(dir);
  if (!fs::exists(root / "config.txt"))
    throw ParseError("no config.txt in run directory " + dir);
  run.config = load_pipeline_config(read_file((root / "config.txt").string()));

  std::vector<std::pair<long, std::string>> seeds;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && name.rfind("seed-", 0) == 0)
      seeds.emplace_back(std::strtol(name.c_str() + 5, nullptr, 10),
                         entry.path().string());
  }
  std::sort(seeds.begin(), seeds.end());
  if (seeds.empty()) throw ParseError("no seed directories in " + dir);
  for (const auto& [seed, path] : seeds) {
    run.seed_dirs.push_back(path);
    const Json m = Json::parse(read_file((fs::path(path) / "metrics.json").string()));
    run.metrics.push_back(metrics_from_json(m));
    const Json f = Json::parse(read_file((fs::path(path) / "feasibility.json").string()));
    run.infeasible_fractions.push_back(f.at("infeasible_fraction").get<double>());
  }
  return run;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * fraction);
  return buf;
}

std::string mean_std(const AggregateValue& v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f +- %.4f", v.mean, v.std);
  return buf;
}

}  // namespace

ComparisonReport report(const std::vector<std::string>& run_dirs) {
  if (run_dirs.empty()) throw InvariantError("report needs at least one run directory");
  std::vector<LoadedRun> runs;
  for (const std::string& dir : run_dirs) runs.push_back(load_run_dir(dir));
  for (const LoadedRun& run : runs)
    if (run.config.model_path != runs.front().config.model_path)
      throw InvariantError("runs use different models: " +
                           runs.front().config.model_path + " vs " +
                           run.config.model_path);

  Json doc;
  doc["runs"] = Json::array();
  std::ostringstream table;
  table << "method  seeds  infeasible%      contact_err%     success%  "
           "pos_err[m]         laplacian[m]       rmse[rad]          slip[m]\n";
  for (const LoadedRun& run : runs) {
    const AggregateReport agg = aggregate_seeds(run.metrics);
    double inf_mean = 0.0;
    for (double f : run.infeasible_fractions) inf_mean += f;
    inf_mean /= static_cast<double>(run.infeasible_fractions.size());

    Json entry;
    entry["dir"] = run.dir;
    entry["method"] = run.config.method;
    entry["model"] = run.config.model_path;
    entry["reference"] = run.config.reference_path;
    entry["aggregate"] = aggregate_json(agg, run.infeasible_fractions);
    Json per_seed = Json::array();
    for (const MetricsReport& m : run.metrics) per_seed.push_back(metrics_json(m));
    entry["per_seed"] = per_seed;
    doc["runs"].push_back(entry);

    char line[320];
    std::snprintf(line, sizeof line,
                  "%-7s %-6zu %-16s %-16s %-9s %-18s %-18s %-18s %s\n",
                  run.config.method.c_str(), run.metrics.size(),
                  percent(inf_mean).c_str(),
                  percent(agg.contact_error_rate.mean).c_str(),
                  percent(agg.success_rate).c_str(),
                  mean_std(agg.mean_position_error).c_str(),
                  mean_std(agg.mean_laplacian_error).c_str(),
                  mean_std(agg.joints_rmse).c_str(),
                  mean_std(agg.foot_slip).c_str());
    table << line;
  }
  ComparisonReport out;
  out.text = table.str();
  out.json = doc.dump(2) + "\n";
  return out;
}

std::vector<std::string> plot(const std::vector<std::string>& run_dirs,
                              const std::string& kind, const std::string& out_dir) {
  if (kind != "laplacian_error" && kind != "contact_timeline" && kind != "cost_curve")
    throw InvariantError("unknown plot kind '" + kind +
                         "': expected laplacian_error, contact_timeline, or cost_curve");
  if (run_dirs.empty()) throw InvariantError("plot needs at least one run directory");
  fs::create_directories(out_dir);
  std::vector<LoadedRun> runs;
  for (const std::string& dir : run_dirs) runs.push_back(load_run_dir(dir));
  std::vector<std::string> written;

  if (kind == "laplacian_error") {
    std::vector<SvgSeries> series;
    std::string keypoint_name;
    for (const LoadedRun& run : runs) {
      const RobotModel model = resolve_model(run.config.model_path);
      const KeypointTrajectory raw = resolve_reference(run.config.reference_path);
      const MappedReference mapped =
          map_reference(model, raw, run.config.keypoint_map, run.config.weights);
      const LaplacianMatrix L = build_laplacian(mapped.x.adjacency, mapped.x.m());
      const KeypointTrajectory x = load_keypoints_file(
          (fs::path(run.seed_dirs.front()) / "keypoints.txt").string());
      if (x.T() == 0) throw InvariantError("empty keypoint trajectory in " + run.dir);
      if (x.T() != mapped.x.T())
        throw DimensionError("keypoints in " + run.dir + " have " +
                             std::to_string(x.T()) + " frames, reference has " +
                             std::to_string(mapped.x.T()));
      int k = pelvis_row(x.names);
      if (k < 0) k = 0;
      keypoint_name = x.names.empty() ? "keypoint 0" : x.names[k];
      SvgSeries s;
      s.label = run.config.method;
      for (int t = 0; t < x.T(); ++t) {
        s.x.push_back(t * x.dt);
        s.y.push_back(per_keypoint_laplacian_error(x, mapped.x, L, t, k));
      }
      series.push_back(std::move(s));
    }
    const std::string path = (fs::path(out_dir) / "laplacian_error.svg").string();
    write_file(path, svg_line_chart("Laplacian error: " + keypoint_name,
                                    "time [s]", "error [m]", series));
    written.push_back(path);
  } else if (kind == "contact_timeline") {
    std::vector<TimelineLane> lanes;
    for (const LoadedRun& run : runs) {
      const fs::path labels = fs::path(run.dir) / "labels.txt";
      if (lanes.empty() && fs::exists(labels))
        lanes.push_back({"truth", load_contacts_file(labels.string())});
    }
    for (const LoadedRun& run : runs)
      lanes.push_back({run.config.method,
                       load_contacts_file(
                           (fs::path(run.seed_dirs.front()) / "contacts.txt").string())});
    const std::string path = (fs::path(out_dir) / "contact_timeline.svg").string();
    write_file(path, svg_contact_timeline("Contact phases", lanes));
    written.push_back(path);
  } else {
    for (const LoadedRun& run : runs) {
      std::vector<SvgSeries> series;
      for (const std::string& seed_dir : run.seed_dirs) {
        const Json diag =
            Json::parse(read_file((fs::path(seed_dir) / "diagnostics.json").string()));
        if (!diag.contains("plan")) continue;
        SvgSeries s;
        s.label = fs::path(seed_dir).filename().string();
        const auto& best = diag["plan"]["best_cost"];
        for (size_t i = 0; i < best.size(); ++i) {
          s.x.push_back(static_cast<double>(i));
          s.y.push_back(best[i].get<double>());
        }
        series.push_back(std::move(s));
      }
      if (series.empty()) continue;
      const std::string name = "cost_curve-" + fs::path(run.dir).filename().string() + ".svg";
      const std::string path = (fs::path(out_dir) / name).string();
      write_file(path, svg_line_chart("Best cost per replan: " + run.config.method,
                                      "replan", "cost", series));
      written.push_back(path);
    }
    if (written.empty())
      throw InvariantError("no planner diagnostics in the given runs");
  }
  return written;
}

ValidateResult validate_trajectory_file(const std::string& model_path,
                                        const std::string& trajectory_path,
                                        double contact_threshold,
                                        const FeasibilityTolerances& tol) {
  const RobotModel model = resolve_model(model_path);
  const TrajectoryDocument doc = load_trajectory_file(trajectory_path);
  if (doc.model_name != model.name)
    throw InvariantError("trajectory was produced for model '" + doc.model_name +
                         "', checking against '" + model.name + "'");
  if (doc.n_q != model.num_joints())
    throw DimensionError("trajectory has " + std::to_string(doc.n_q) +
                         " joints, model has " + std::to_string(model.num_joints()));
  ValidateResult out;
  out.report = check_trajectory_feasibility(model, doc.configurations, doc.dt,
                                            contact_threshold, tol);
  Json j = feasibility_json(out.report);
  j["model"] = model.name;
  j["trajectory"] = trajectory_path;
  j["dt"] = doc.dt;
  out.json = j.dump(2) + "\n";
  return out;
}

}  // namespace retarget
