#pragma once

#include <string>
#include <vector>

#include "retarget/feasibility.hpp"
#include "retarget/kinematics.hpp"
#include "retarget/state.hpp"

namespace retarget {

/// Contents of a trajectory file: configurations only (no velocities), with
/// the producing model's name recorded for cross-checking.
struct TrajectoryDocument {
  std::string model_name;
  int n_q = 0;
  double dt = 0.0;
  std::vector<Configuration> configurations;
};

/// Text formats (docs/file_formats.md): whitespace-separated headers and
/// rows, floats written with 17 significant digits, quaternions ordered
/// w x y z. Parsers throw ParseError naming the offending line.

KeypointTrajectory load_keypoints(const std::string& text);
KeypointTrajectory load_keypoints_file(const std::string& path);
std::string serialize_keypoints(const KeypointTrajectory& x);

ContactSequence load_contacts(const std::string& text);
ContactSequence load_contacts_file(const std::string& path);
std::string serialize_contacts(const ContactSequence& contacts);

TrajectoryDocument load_trajectory(const std::string& text);
TrajectoryDocument load_trajectory_file(const std::string& path);
std::string serialize_trajectory(const TrajectoryDocument& doc);

TrajectoryDocument to_document(const RobotModel& model, const Trajectory& trajectory);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Canonical float formatting used by every writer (17 significant digits).
std::string format_double(double value);

}  // namespace retarget
