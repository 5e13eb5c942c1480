#include "retarget/fixtures.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace retarget {

namespace {

constexpr double kPi = 3.14159265358979323846;

double smoothstep(double u) {
  u = std::min(std::max(u, 0.0), 1.0);
  return u * u * (3.0 - 2.0 * u);
}

// Pitch-balanced leg bend: hip, knee, and ankle pitch sum to zero, so the
// foot stays level and the ankle stays under the hip for any bend angle.
void set_leg(VecX& joints, int first, double bend, double roll) {
  joints[first + 0] = -bend;
  joints[first + 1] = roll;
  joints[first + 2] = 2.0 * bend;
  joints[first + 3] = -bend;
}

VecX posed_joints(const RobotModel& model, double left_bend, double right_bend,
                  double roll) {
  VecX joints = VecX::Zero(model.num_joints());
  set_leg(joints, 0, left_bend, roll);
  set_leg(joints, 4, right_bend, roll);
  joints[8] = 0.1;
  joints[9] = -0.3;
  joints[10] = 0.1;
  joints[11] = -0.3;
  return joints;
}

// Lowest contact point of one group, in the frame of the current base pose.
double group_min_z(const RobotModel& model, const std::vector<LinkPose>& poses,
                   const std::vector<int>& points) {
  double lowest = std::numeric_limits<double>::infinity();
  for (int p : points) lowest = std::min(lowest, contact_point_position(model, poses, p).z());
  return lowest;
}

Vec3 group_centroid(const RobotModel& model, const std::vector<LinkPose>& poses,
                    const std::vector<int>& points) {
  Vec3 sum = Vec3::Zero();
  for (int p : points) sum += contact_point_position(model, poses, p);
  return sum / static_cast<double>(points.size());
}

ContactSequence all_planted(int frames, double dt, const RobotModel& model) {
  ContactSequence truth;
  truth.flags = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(
      frames, static_cast<int>(model.contact_groups().size()), true);
  truth.dt = dt;
  truth.groups = model.contact_groups();
  return truth;
}

void check_fixture_shape(int frames, double dt) {
  if (frames < 2) throw InvariantError("fixture needs at least 2 frames");
  if (dt <= 0.0) throw InvariantError("fixture dt must be positive");
}

}  // namespace

Fixture squat_fixture(int frames, double dt) {
  check_fixture_shape(frames, dt);
  RobotModel model = models::mini_humanoid();

  Fixture fixture;
  fixture.name = "squat";
  fixture.source.reserve(frames);
  for (int t = 0; t < frames; ++t) {
    double u = static_cast<double>(t) / (frames - 1);
    double bend = 0.1 + 0.25 * (1.0 - std::cos(2.0 * kPi * 2.0 * u));

    Configuration q;
    q.joints = posed_joints(model, bend, bend, 0.0);
    std::vector<LinkPose> poses = link_poses(model, q);
    double lowest = std::min(group_min_z(model, poses, model.contact_group_points("left_foot")),
                             group_min_z(model, poses, model.contact_group_points("right_foot")));
    q.base_position = Vec3(0.0, 0.0, -lowest);
    fixture.source.push_back(q);
  }
  fixture.reference = fk_configurations(model, fixture.source, dt);
  fixture.truth_contacts = all_planted(frames, dt, model);
  return fixture;
}

Fixture drift_fixture(int frames, double dt, double drift, double noise,
                      std::uint64_t noise_seed) {
  Fixture fixture = squat_fixture(frames, dt);
  fixture.name = "drift";

  std::mt19937_64 rng(noise_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int t = 0; t < frames; ++t) {
    double u = static_cast<double>(t) / (frames - 1);
    double shift = drift * smoothstep(u);
    MatX3& positions = fixture.reference.frames[t].positions;
    for (int k = 0; k < positions.rows(); ++k) {
      positions(k, 1) += shift;
      for (int c = 0; c < 3; ++c) positions(k, c) += noise * gauss(rng);
    }
  }
  return fixture;
}

Fixture one_foot_fixture(int frames, double dt) {
  check_fixture_shape(frames, dt);
  RobotModel model = models::mini_humanoid();
  const std::vector<int> left = model.contact_group_points("left_foot");
  const std::vector<int> right = model.contact_group_points("right_foot");

  // Lean until the pelvis sits over the left foot line, then bend the right
  // leg further to lift its foot through the middle third.
  const double bend = 0.25;
  const double lean = -std::asin(0.06 / 0.28);

  Fixture fixture;
  fixture.name = "one_foot";
  fixture.source.reserve(frames);

  Vec3 left_anchor = Vec3::Zero();
  ContactSequence& truth = fixture.truth_contacts;
  truth.flags.resize(frames, 2);
  truth.dt = dt;
  truth.groups = model.contact_groups();

  for (int t = 0; t < frames; ++t) {
    double u = static_cast<double>(t) / (frames - 1);
    double shift = u < 1.0 / 3.0   ? smoothstep(3.0 * u)
                   : u < 2.0 / 3.0 ? 1.0
                                   : smoothstep(3.0 * (1.0 - u));
    double lift = u >= 1.0 / 3.0 && u < 2.0 / 3.0
                      ? std::pow(std::sin(kPi * (3.0 * u - 1.0)), 2)
                      : 0.0;

    Configuration q;
    q.joints = posed_joints(model, bend, bend + 0.5 * lift, lean * shift);
    std::vector<LinkPose> poses = link_poses(model, q);
    Vec3 centroid = group_centroid(model, poses, left);
    if (t == 0) left_anchor = centroid;
    q.base_position.head<2>() = (left_anchor - centroid).head<2>();
    q.base_position.z() = -group_min_z(model, poses, left);

    double right_min = group_min_z(model, poses, right) + q.base_position.z();
    truth.flags(t, 0) = true;
    truth.flags(t, 1) = right_min < 0.02;
    fixture.source.push_back(q);
  }
  fixture.reference = fk_configurations(model, fixture.source, dt);
  return fixture;
}

Fixture fixture_by_name(const std::string& name) {
  if (name == "squat") return squat_fixture();
  if (name == "drift") return drift_fixture();
  if (name == "one_foot" || name == "one-foot") return one_foot_fixture();
  throw InvariantError("unknown fixture '" + name + "': expected squat, drift, or one_foot");
}

}  // namespace retarget
