#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "retarget/fixtures.hpp"
#include "retarget/pipeline.hpp"

namespace {

using namespace retarget;

/// Expands "0..4", "0,1,2", or "3" into a space-separated integer list.
std::string expand_seeds(const std::string& spec) {
  const size_t dots = spec.find("..");
  if (dots != std::string::npos) {
    const long lo = std::stol(spec.substr(0, dots));
    const long hi = std::stol(spec.substr(dots + 2));
    if (hi < lo) throw InvariantError("seed range '" + spec + "' is descending");
    std::string out;
    for (long s = lo; s <= hi; ++s) out += (s == lo ? "" : " ") + std::to_string(s);
    return out;
  }
  std::string out = spec;
  for (char& c : out)
    if (c == ',') c = ' ';
  return out;
}

void print_run_summary(const RunResult& result) {
  std::printf("run %s\n", result.dir.c_str());
  for (const SeedResult& s : result.seeds)
    std::printf(
        "  seed %llu: infeasible %.1f%%, contact_err %.1f%%, pos_err %.4f m, "
        "success %s\n",
        static_cast<unsigned long long>(s.seed),
        100.0 * s.feasibility.infeasible_fraction,
        100.0 * s.metrics.contact_error_rate, s.metrics.mean_position_error,
        s.metrics.success ? "yes" : "no");
  std::printf("  aggregate: success_rate %.0f%%, pos_err %.4f +- %.4f m over %d seed(s)\n",
              100.0 * result.aggregate.success_rate,
              result.aggregate.mean_position_error.mean,
              result.aggregate.mean_position_error.std, result.aggregate.count);
}

Trajectory trajectory_of(const std::vector<Configuration>& qs, int n_q, double dt) {
  Trajectory out;
  out.dt = dt;
  for (const Configuration& q : qs) out.states.push_back({q, VecX::Zero(6 + n_q)});
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motion retargeting pipeline: geometric and dynamics-aware"};
  app.require_subcommand(1);

  // ------------------------------------------------------------------ run --
  auto* run_cmd = app.add_subcommand("run", "execute one retargeting method over seeds");
  std::vector<std::string> lines;  // config lines in flag order
  std::string config_path;
  auto opt = [&](const char* flag, const char* key, const char* help) {
    run_cmd->add_option_function<std::string>(
        flag, [&lines, key](const std::string& v) { lines.push_back(std::string(key) + " " + v); },
        help);
  };
  opt("--model", "model", "model file or builtin:<name>");
  opt("--reference", "reference", "keypoints file or fixture:<name>");
  opt("--labels", "labels", "ground-truth contact labels file");
  opt("--method", "method", "gr | idr | ddr");
  opt("--profile", "profile", "fast | thorough preset");
  opt("--out", "out_dir", "output directory root");
  opt("--w-p", "w_p", "spatial cost weight");
  opt("--w-l", "w_l", "deformation cost weight");
  opt("--contact-threshold", "contact_threshold", "contact height threshold, m");
  opt("--success-threshold", "success_threshold", "pelvis deviation bound, m");
  opt("--eps-dyn", "eps_dyn", "dynamics residual bound, N (0 = auto)");
  opt("--anchored-base", "anchored_base", "0|1 drop unactuated base rows");
  opt("--ik-damping", "ik_damping", "");
  opt("--ik-max-iterations", "ik_max_iterations", "");
  opt("--ik-tolerance", "ik_tolerance", "");
  opt("--ik-max-backtracks", "ik_max_backtracks", "");
  opt("--ik-ground-penalty", "ik_ground_penalty", "0|1");
  opt("--ik-ground-penalty-weight", "ik_ground_penalty_weight", "");
  opt("--cem-population", "cem_population", "");
  opt("--cem-elites", "cem_elites", "");
  opt("--cem-iterations", "cem_iterations", "");
  opt("--cem-init-std", "cem_init_std", "");
  opt("--cem-std-floor", "cem_std_floor", "");
  opt("--cem-mean-smoothing", "cem_mean_smoothing", "");
  opt("--cem-knot-spacing", "cem_knot_spacing", "");
  opt("--cem-horizon", "cem_horizon", "");
  opt("--cem-replan-stride", "cem_replan_stride", "");
  opt("--cem-workers", "cem_workers", "evaluation threads, 0 = all cores");
  opt("--cem-effort-weight", "cem_effort_weight", "");
  opt("--dyn-mode", "dyn_mode", "torque | pd_target");
  opt("--dyn-kp", "dyn_kp", "");
  opt("--dyn-kd", "dyn_kd", "");
  opt("--dyn-substeps", "dyn_substeps", "");
  opt("--contact-stiffness", "contact_stiffness", "");
  opt("--contact-damping", "contact_damping", "");
  opt("--contact-ground", "contact_ground", "");
  opt("--contact-reg-velocity", "contact_reg_velocity", "");
  run_cmd->add_option_function<std::string>(
      "--seeds,--seed",
      [&lines](const std::string& v) { lines.push_back("seeds " + expand_seeds(v)); },
      "seed list: 3 | 0,1,2 | 0..4");
  run_cmd->add_option_function<std::string>(
      "--keypoint-weights",
      [&lines](const std::string& v) {
        std::string spaced = v;
        for (char& c : spaced)
          if (c == ',') c = ' ';
        lines.push_back("keypoint_weights " + spaced);
      },
      "per-reference-keypoint weights, comma separated");
  run_cmd->add_option_function<std::vector<std::string>>(
      "--map",
      [&lines](const std::vector<std::string>& pairs) {
        for (const std::string& v : pairs) {
          const size_t eq = v.find('=');
          if (eq == std::string::npos)
            throw InvariantError("--map expects ref=model, got '" + v + "'");
          lines.push_back("map " + v.substr(0, eq) + " " + v.substr(eq + 1));
        }
      },
      "reference=model keypoint name pair, repeatable")
      ->take_all();
  run_cmd->add_option("--config", config_path,
                      "config file; overrides all flags, later lines win");

  // --------------------------------------------------------------- report --
  auto* report_cmd = app.add_subcommand("report", "comparison table over run directories");
  std::vector<std::string> report_dirs;
  std::string report_json;
  report_cmd->add_option("dirs", report_dirs, "run directories")->required();
  report_cmd->add_option("--json", report_json, "also write the JSON report here");

  // ----------------------------------------------------------------- plot --
  auto* plot_cmd = app.add_subcommand("plot", "render SVG charts from run directories");
  std::vector<std::string> plot_dirs;
  std::string plot_kind = "laplacian_error";
  std::string plot_out = "plots";
  plot_cmd->add_option("dirs", plot_dirs, "run directories")->required();
  plot_cmd->add_option("--kind", plot_kind,
                       "laplacian_error | contact_timeline | cost_curve");
  plot_cmd->add_option("--out", plot_out, "output directory");

  // ------------------------------------------------------------- validate --
  auto* validate_cmd = app.add_subcommand("validate", "feasibility-check a trajectory file");
  std::string validate_model_path = "builtin:mini_humanoid";
  std::string validate_path;
  double validate_threshold = 0.02;
  double validate_eps = 0.0;
  bool validate_anchored = false;
  validate_cmd->add_option("trajectory", validate_path, "trajectory file")->required();
  validate_cmd->add_option("--model", validate_model_path, "model file or builtin:<name>");
  validate_cmd->add_option("--contact-threshold", validate_threshold, "");
  validate_cmd->add_option("--eps-dyn", validate_eps, "residual bound, N (0 = auto)");
  validate_cmd->add_flag("--anchored-base", validate_anchored, "");

  // ---------------------------------------------------------------- model --
  auto* model_cmd = app.add_subcommand("model", "model file utilities");
  model_cmd->require_subcommand(1);
  auto* check_cmd = model_cmd->add_subcommand("check", "list model invariant violations");
  std::string check_path;
  check_cmd->add_option("model", check_path, "model file or builtin:<name>")->required();

  // ------------------------------------------------------------- fixtures --
  auto* fixtures_cmd = app.add_subcommand("fixtures", "export a builtin fixture to files");
  std::string fixture_name = "squat";
  std::string fixture_out = "fixtures";
  fixtures_cmd->add_option("--name", fixture_name, "squat | drift | one_foot");
  fixtures_cmd->add_option("--out", fixture_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) {
      PipelineConfig config;
      for (const std::string& line : lines) apply_pipeline_config(config, line);
      if (!config_path.empty())
        apply_pipeline_config(config, read_file(config_path));
      print_run_summary(run(config));
    } else if (report_cmd->parsed()) {
      const ComparisonReport rep = report(report_dirs);
      std::fputs(rep.text.c_str(), stdout);
      if (!report_json.empty()) {
        write_file(report_json, rep.json);
        std::printf("json written to %s\n", report_json.c_str());
      }
    } else if (plot_cmd->parsed()) {
      for (const std::string& path : plot(plot_dirs, plot_kind, plot_out))
        std::printf("%s\n", path.c_str());
    } else if (validate_cmd->parsed()) {
      FeasibilityTolerances tol;
      tol.eps_dyn = validate_eps;
      tol.anchored_base = validate_anchored;
      const ValidateResult res = validate_trajectory_file(
          validate_model_path, validate_path, validate_threshold, tol);
      std::fputs(res.json.c_str(), stdout);
    } else if (check_cmd->parsed()) {
      const std::string prefix = "builtin:";
      const RobotModel model = check_path.rfind(prefix, 0) == 0
                                   ? resolve_model(check_path)
                                   : load_model_unchecked(read_file(check_path));
      const ValidationReport report = validate_model(model);
      if (report.valid()) {
        std::printf("%s: ok (%d joints, %zu keypoints, %zu contact points)\n",
                    model.name.c_str(), model.num_joints(), model.keypoints.size(),
                    model.contact_points.size());
      } else {
        for (const std::string& v : report.violations)
          std::printf("%s: %s\n", check_path.c_str(), v.c_str());
        return 1;
      }
    } else if (fixtures_cmd->parsed()) {
      const Fixture fixture = fixture_by_name(fixture_name);
      const RobotModel model = models::mini_humanoid();
      std::filesystem::create_directories(fixture_out);
      const std::string base = fixture_out + "/" + fixture.name;
      write_file(base + "-reference.txt", serialize_keypoints(fixture.reference));
      write_file(base + "-labels.txt", serialize_contacts(fixture.truth_contacts));
      write_file(base + "-source.txt",
                 serialize_trajectory(to_document(
                     model, trajectory_of(fixture.source, model.num_joints(),
                                          fixture.reference.dt))));
      std::printf("%s-{reference,labels,source}.txt\n", base.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
