#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "retarget/cem_mpc.hpp"
#include "retarget/dynamics.hpp"
#include "retarget/feasibility.hpp"
#include "retarget/ik.hpp"
#include "retarget/io.hpp"
#include "retarget/metrics.hpp"
#include "retarget/model.hpp"

namespace retarget {

/// Full description of one retargeting run. `model_path` accepts a file path
/// or "builtin:<name>"; `reference_path` accepts a keypoints file or
/// "fixture:<name>". The method is one of gr, idr, ddr.
struct PipelineConfig {
  std::string model_path = "builtin:mini_humanoid";
  std::string reference_path;
  std::string labels_path;  // optional ground-truth contact labels
  std::string method = "ddr";
  std::vector<std::uint64_t> seeds = {0};
  CostWeights weights;
  std::map<std::string, std::string> keypoint_map;  // reference -> model names
  IkOptions ik;          // weights/name_map overwritten from the fields above
  CemConfig cem;
  DynamicsParams dynamics;
  double contact_threshold = 0.02;
  double success_threshold = 0.5;
  FeasibilityTolerances tolerances;
  std::string out_dir = "runs";
};

/// Applies a named preset (fast | thorough) over solver and dynamics knobs.
void apply_profile(PipelineConfig& config, const std::string& profile);

PipelineConfig load_pipeline_config(const std::string& text);
std::string serialize_pipeline_config(const PipelineConfig& config);

/// Applies config lines on top of an existing config; later lines win.
void apply_pipeline_config(PipelineConfig& config, const std::string& text);

/// Stable run identifier: hash of the canonical config serialization.
std::string run_id(const PipelineConfig& config);

/// Loads a model from a path or a builtin by "builtin:<name>".
RobotModel resolve_model(const std::string& model_path);

/// Loads reference keypoints from a path or a fixture by "fixture:<name>".
KeypointTrajectory resolve_reference(const std::string& reference_path);

struct SeedResult {
  std::uint64_t seed = 0;
  std::string dir;
  Trajectory trajectory;
  KeypointTrajectory keypoints;  // fk of the result, aligned to the reference
  ContactSequence contacts;      // estimated
  FeasibilityReport feasibility;
  MetricsReport metrics;
  PlanDiagnostics plan;          // empty for gr
  IkDiagnostics ik;              // empty for ddr
};

struct RunResult {
  std::string id;
  std::string dir;
  std::vector<SeedResult> seeds;
  AggregateReport aggregate;
};

/// Executes the configured method for every seed, writing per-seed artifact
/// directories plus the aggregate under out_dir/<method>-<run id>/.
/// Identical config and seed reproduce bit-identical trajectory artifacts.
RunResult run(const PipelineConfig& config);

struct ComparisonReport {
  std::string text;  // human-readable table
  std::string json;  // machine-readable, recomputed from per-seed artifacts
};

/// Cross-method comparison over completed run directories.
ComparisonReport report(const std::vector<std::string>& run_dirs);

/// Writes one vector-graphics file per run directory (or one combined file)
/// for the requested kind: laplacian_error | contact_timeline | cost_curve.
/// Returns the written paths.
std::vector<std::string> plot(const std::vector<std::string>& run_dirs,
                              const std::string& kind, const std::string& out_dir);

/// Feasibility-checks a trajectory file against a model.
struct ValidateResult {
  FeasibilityReport report;
  std::string json;
};
ValidateResult validate_trajectory_file(const std::string& model_path,
                                        const std::string& trajectory_path,
                                        double contact_threshold = 0.02,
                                        const FeasibilityTolerances& tol = {});

}  // namespace retarget
