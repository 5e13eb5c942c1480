#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <json.hpp>

#include "retarget/fixtures.hpp"
#include "retarget/pipeline.hpp"

using namespace retarget;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

PipelineConfig small_config(const std::string& dir) {
  PipelineConfig config;
  apply_profile(config, "fast");
  config.reference_path = "pipeline_work/reference.txt";
  config.labels_path = "pipeline_work/labels.txt";
  config.out_dir = dir;
  config.seeds = {0, 1};
  return config;
}

void write_small_fixture() {
  const Fixture fixture = squat_fixture(30, 0.02);
  fs::create_directories("pipeline_work");
  write_file("pipeline_work/reference.txt", serialize_keypoints(fixture.reference));
  write_file("pipeline_work/labels.txt", serialize_contacts(fixture.truth_contacts));
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int n = 0;
  for (size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

TEST_CASE("config round trip and run id") {
  PipelineConfig config;
  config.reference_path = "fixture:squat";
  config.seeds = {3, 4, 5};
  config.keypoint_map["hip"] = "pelvis";
  config.weights.keypoint_weights = VecX::Constant(8, 0.5);
  apply_profile(config, "thorough");

  const std::string text = serialize_pipeline_config(config);
  const PipelineConfig back = load_pipeline_config(text);
  CHECK(serialize_pipeline_config(back) == text);
  CHECK(run_id(back) == run_id(config));
  CHECK(run_id(config).size() == 16);

  PipelineConfig other = back;
  other.seeds = {3, 4};
  CHECK(run_id(other) != run_id(config));

  CHECK(back.cem.population == 64);
  CHECK(back.cem.horizon == 15);
  CHECK(back.dynamics.mode == ControlMode::PdTarget);
  CHECK(back.keypoint_map.at("hip") == "pelvis");

  PipelineConfig fast;
  apply_profile(fast, "fast");
  CHECK(fast.cem.population == 32);
  CHECK(fast.cem.replan_stride == 5);
  CHECK_THROWS_AS(apply_profile(fast, "slow"), InvariantError);
}

TEST_CASE("config parsing reports line numbers and overrides in order") {
  CHECK_THROWS_WITH_AS(load_pipeline_config("method gr\nbogus 1\n"),
                       "line 2: unknown key 'bogus'", ParseError);
  CHECK_THROWS_WITH_AS(load_pipeline_config("cem_population many\n"),
                       "line 1: expected an integer, got 'many'", ParseError);
  CHECK_THROWS_WITH_AS(load_pipeline_config("dyn_mode jerk\n"),
                       "line 1: dyn_mode must be torque or pd_target, got 'jerk'",
                       ParseError);
  CHECK_THROWS_AS(load_pipeline_config("seeds\n"), ParseError);

  // comments, profile expansion, later lines win
  PipelineConfig config = load_pipeline_config(
      "profile fast  # preset first\ncem_population 48\nseeds 7 8\n");
  CHECK(config.cem.population == 48);
  CHECK(config.cem.replan_stride == 5);
  CHECK(config.seeds == std::vector<std::uint64_t>{7, 8});

  PipelineConfig base;
  apply_pipeline_config(base, "w_p 2.5\n");
  apply_pipeline_config(base, "w_l 0.25\n");
  CHECK(base.weights.w_p == 2.5);
  CHECK(base.weights.w_l == 0.25);
}

TEST_CASE("model and reference resolution") {
  CHECK(resolve_model("builtin:mini_humanoid").name == "mini_humanoid");
  CHECK(resolve_model("builtin:planar_biped").name == "planar_biped");
  CHECK_THROWS_AS(resolve_model("builtin:dog"), InvariantError);

  fs::create_directories("pipeline_work");
  write_file("pipeline_work/model.json", serialize_model(models::mini_humanoid()));
  CHECK(resolve_model("pipeline_work/model.json").name == "mini_humanoid");

  const KeypointTrajectory ref = resolve_reference("fixture:squat");
  CHECK(ref.T() == 100);
  CHECK(ref.names[4] == "pelvis");
  CHECK_THROWS_AS(resolve_reference("fixture:sprint"), InvariantError);

  write_small_fixture();
  CHECK(resolve_reference("pipeline_work/reference.txt").T() == 30);
}

TEST_CASE("gr run writes a complete artifact set") {
  fs::remove_all("pipeline_runs_gr");
  write_small_fixture();
  PipelineConfig config = small_config("pipeline_runs_gr");
  config.method = "gr";
  config.seeds = {0, 1, 2};  // deterministic method keeps only the first

  const RunResult result = run(config);
  REQUIRE(result.seeds.size() == 1);
  CHECK(result.dir == "pipeline_runs_gr/gr-" + result.id);
  const fs::path seed_dir(result.seeds[0].dir);
  for (const char* name : {"trajectory.txt", "keypoints.txt", "contacts.txt",
                           "metrics.json", "feasibility.json", "diagnostics.json"})
    CHECK(fs::exists(seed_dir / name));
  CHECK(fs::exists(fs::path(result.dir) / "config.txt"));
  CHECK(fs::exists(fs::path(result.dir) / "aggregate.json"));
  CHECK(fs::exists(fs::path(result.dir) / "labels.txt"));

  // the geometric fit is its own joint-space baseline
  CHECK(result.seeds[0].metrics.joints_rmse == 0.0);
  CHECK(result.seeds[0].metrics.contact_error_rate == 0.0);
  CHECK(result.seeds[0].metrics.success);
  CHECK(result.seeds[0].metrics.mean_position_error < 0.01);

  const TrajectoryDocument doc =
      load_trajectory_file((seed_dir / "trajectory.txt").string());
  CHECK(doc.model_name == "mini_humanoid");
  CHECK(doc.configurations.size() == 30);

  const Json diag = Json::parse(read_file((seed_dir / "diagnostics.json").string()));
  CHECK(diag.at("method") == "gr");
  CHECK(diag.at("ik").at("residuals").size() == 30);
}

TEST_CASE("ddr run is reproducible and aligned to the reference") {
  fs::remove_all("pipeline_runs_ddr");
  write_small_fixture();
  PipelineConfig config = small_config("pipeline_runs_ddr");
  config.method = "ddr";

  const RunResult first = run(config);
  REQUIRE(first.seeds.size() == 2);
  CHECK(first.seeds[0].trajectory.states.size() == 31);  // initial state kept
  CHECK(first.seeds[0].keypoints.T() == 30);
  CHECK(first.seeds[0].contacts.T() == 30);
  CHECK(first.seeds[0].feasibility.verdicts.size() == 30);
  CHECK(first.seeds[0].plan.best_cost.size() == 6);  // 30 steps / stride 5

  // distinct seeds explore differently
  const std::string t0 = read_file(first.seeds[0].dir + "/trajectory.txt");
  const std::string t1 = read_file(first.seeds[1].dir + "/trajectory.txt");
  CHECK(t0 != t1);

  const RunResult second = run(config);
  CHECK(second.dir == first.dir);
  for (int s = 0; s < 2; ++s) {
    CHECK(read_file(second.seeds[s].dir + "/trajectory.txt") ==
          read_file(first.seeds[s].dir + "/trajectory.txt"));
    CHECK(read_file(second.seeds[s].dir + "/keypoints.txt") ==
          read_file(first.seeds[s].dir + "/keypoints.txt"));
    CHECK(read_file(second.seeds[s].dir + "/metrics.json") ==
          read_file(first.seeds[s].dir + "/metrics.json"));
  }

  CHECK_THROWS_AS(
      run([] {
        PipelineConfig bad;
        bad.reference_path = "fixture:squat";
        bad.method = "walk";
        return bad;
      }()),
      InvariantError);
}

TEST_CASE("report recomputes aggregates from artifacts") {
  write_small_fixture();
  PipelineConfig config = small_config("pipeline_runs_rep");
  if (!fs::exists("pipeline_runs_rep")) {
    config.method = "gr";
    run(config);
    config.method = "idr";
    config.seeds = {0};
    run(config);
  }
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator("pipeline_runs_rep"))
    dirs.push_back(entry.path().string());
  std::sort(dirs.begin(), dirs.end());
  REQUIRE(dirs.size() == 2);

  const ComparisonReport rep = report(dirs);
  CHECK(count_occurrences(rep.text, "\n") >= 3);
  CHECK(rep.text.find("gr") != std::string::npos);
  CHECK(rep.text.find("idr") != std::string::npos);

  const Json doc = Json::parse(rep.json);
  REQUIRE(doc.at("runs").size() == 2);
  for (const auto& entry : doc.at("runs")) {
    const Json written =
        Json::parse(read_file(entry.at("dir").get<std::string>() + "/aggregate.json"));
    CHECK(entry.at("aggregate") == written);  // recomputed == written
  }

  // mixing models is refused by name
  fs::create_directories("pipeline_work/alien/seed-0");
  PipelineConfig alien = small_config("x");
  alien.model_path = "builtin:planar_biped";
  write_file("pipeline_work/alien/config.txt", serialize_pipeline_config(alien));
  std::error_code ec;
  fs::copy(dirs[0] + "/seed-0", "pipeline_work/alien/seed-0",
           fs::copy_options::overwrite_existing | fs::copy_options::recursive, ec);
  CHECK_THROWS_AS(report({dirs[0], "pipeline_work/alien"}), InvariantError);

  CHECK_THROWS_AS(report({"no_such_run_dir"}), ParseError);
}

TEST_CASE("plots render from run directories") {
  write_small_fixture();
  PipelineConfig config = small_config("pipeline_runs_rep");
  if (!fs::exists("pipeline_runs_rep")) {
    config.method = "gr";
    run(config);
    config.method = "idr";
    config.seeds = {0};
    run(config);
  }
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator("pipeline_runs_rep"))
    dirs.push_back(entry.path().string());
  std::sort(dirs.begin(), dirs.end());

  fs::remove_all("pipeline_plots");
  const auto lap = plot(dirs, "laplacian_error", "pipeline_plots");
  REQUIRE(lap.size() == 1);
  const std::string lap_svg = read_file(lap[0]);
  CHECK(count_occurrences(lap_svg, "<polyline") == 2);  // one curve per run
  CHECK(lap_svg.find("pelvis") != std::string::npos);

  const auto timeline = plot(dirs, "contact_timeline", "pipeline_plots");
  REQUIRE(timeline.size() == 1);
  const std::string tl_svg = read_file(timeline[0]);
  CHECK(tl_svg.find(">truth<") != std::string::npos);  // labels lane plus methods
  CHECK(tl_svg.find(">gr<") != std::string::npos);
  CHECK(tl_svg.find(">idr<") != std::string::npos);

  const auto cost = plot(dirs, "cost_curve", "pipeline_plots");
  REQUIRE(cost.size() == 1);  // gr has no planner trace
  CHECK(cost[0].find("idr") != std::string::npos);

  CHECK_THROWS_AS(plot(dirs, "heatmap", "pipeline_plots"), InvariantError);
  CHECK_THROWS_AS(plot({dirs[0]}, "cost_curve", "pipeline_plots"), InvariantError);

  // corrupt artifacts error out before any file is written
  fs::remove_all("pipeline_work/broken");
  fs::create_directories("pipeline_work/broken");
  fs::copy(dirs[1], "pipeline_work/broken", fs::copy_options::recursive);
  write_file("pipeline_work/broken/seed-0/keypoints.txt", "");
  fs::remove_all("pipeline_plots_broken");
  CHECK_THROWS_AS(plot({"pipeline_work/broken"}, "laplacian_error", "pipeline_plots_broken"),
                  ParseError);
  CHECK_FALSE(fs::exists("pipeline_plots_broken/laplacian_error.svg"));
}

TEST_CASE("trajectory files validate against the generating model") {
  write_small_fixture();
  PipelineConfig config = small_config("pipeline_runs_rep");
  if (!fs::exists("pipeline_runs_rep")) {
    config.method = "gr";
    run(config);
  }
  std::string trajectory;
  for (const auto& entry : fs::directory_iterator("pipeline_runs_rep"))
    if (entry.path().filename().string().rfind("gr-", 0) == 0)
      trajectory = entry.path().string() + "/seed-0/trajectory.txt";
  REQUIRE_FALSE(trajectory.empty());

  const ValidateResult res = validate_trajectory_file("builtin:mini_humanoid", trajectory);
  CHECK(res.report.verdicts.size() == 30);
  const Json run_feasibility = Json::parse(
      read_file(fs::path(trajectory).parent_path().string() + "/feasibility.json"));
  CHECK(res.report.infeasible_fraction ==
        run_feasibility.at("infeasible_fraction").get<double>());
  const Json j = Json::parse(res.json);
  CHECK(j.at("model") == "mini_humanoid");
  CHECK(j.at("frames") == 30);

  CHECK_THROWS_AS(validate_trajectory_file("builtin:planar_biped", trajectory),
                  InvariantError);
}
