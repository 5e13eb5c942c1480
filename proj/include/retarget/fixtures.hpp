#pragma once

#include <cstdint>
#include <string>

#include "retarget/feasibility.hpp"
#include "retarget/kinematics.hpp"
#include "retarget/state.hpp"

namespace retarget {

/// Analytic test motion against the mini humanoid: a reference keypoint
/// trajectory, ground-truth contact labels, and the generating joint-space
/// trajectory.
struct Fixture {
  std::string name;
  KeypointTrajectory reference;
  ContactSequence truth_contacts;
  std::vector<Configuration> source;  // configurations behind the keypoints
};

/// Vertical pelvis oscillation with both feet planted; every frame in
/// double support.
Fixture squat_fixture(int frames = 100, double dt = 0.02);

/// Squat plus a smooth lateral drift of all keypoints and seeded per-frame
/// noise, emulating noisy video extraction. Truth labels keep both feet in
/// contact; the noise makes naive per-frame fits dynamically infeasible.
Fixture drift_fixture(int frames = 100, double dt = 0.02, double drift = 0.10,
                      double noise = 0.003, std::uint64_t noise_seed = 7);

/// Weight shift onto the left leg with the right foot lifted during the
/// middle third; labels follow the construction.
Fixture one_foot_fixture(int frames = 120, double dt = 0.02);

Fixture fixture_by_name(const std::string& name);

}  // namespace retarget
