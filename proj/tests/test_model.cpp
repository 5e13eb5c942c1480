#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "retarget/model.hpp"

#include <string>

using namespace retarget;

namespace {

std::string replace_once(std::string text, const std::string& from, const std::string& to) {
  auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("reference models satisfy every invariant") {
  for (const RobotModel& m : {models::planar_biped(), models::mini_humanoid()}) {
    ValidationReport report = validate_model(m);
    for (const auto& v : report.violations) MESSAGE(v);
    CHECK(report.valid());
  }
}

TEST_CASE("mini humanoid has the documented dimensions") {
  RobotModel m = models::mini_humanoid();
  CHECK(m.num_joints() == 12);
  CHECK(m.num_keypoints() == 8);
  CHECK(m.nv() == 18);
  CHECK(m.links.size() == 13);
  CHECK(m.contact_points.size() == 8);
  CHECK(m.keypoint_adjacency.size() == 7);
  CHECK(m.total_mass() == doctest::Approx(3.34));
  CHECK(m.contact_groups() == std::vector<std::string>{"left_foot", "right_foot"});
  CHECK(m.contact_group_points("left_foot").size() == 4);
  CHECK(m.contact_group_points("right_foot").size() == 4);
  REQUIRE(m.keypoint_index("pelvis").has_value());
  CHECK(m.keypoints[*m.keypoint_index("pelvis")].link == 0);
  CHECK_FALSE(m.keypoint_index("tail").has_value());
}

TEST_CASE("planar biped has the documented dimensions") {
  RobotModel m = models::planar_biped();
  CHECK(m.num_joints() == 4);
  CHECK(m.num_keypoints() == 4);
  CHECK(m.links.size() == 5);
  CHECK(m.contact_points.size() == 2);
  CHECK(m.total_mass() == doctest::Approx(2.0));
}

TEST_CASE("serialize then load reproduces the model") {
  for (const RobotModel& m : {models::planar_biped(), models::mini_humanoid()}) {
    RobotModel r = load_model(serialize_model(m));
    CHECK(r.name == m.name);
    REQUIRE(r.links.size() == m.links.size());
    for (size_t i = 0; i < m.links.size(); ++i) {
      CHECK(r.links[i].name == m.links[i].name);
      CHECK(r.links[i].parent == m.links[i].parent);
      CHECK(r.links[i].mass == doctest::Approx(m.links[i].mass));
      CHECK((r.links[i].com - m.links[i].com).norm() < 1e-15);
      CHECK((r.links[i].inertia - m.links[i].inertia).norm() < 1e-15);
      CHECK((r.links[i].joint_axis - m.links[i].joint_axis).norm() < 1e-15);
      CHECK((r.links[i].offset_position - m.links[i].offset_position).norm() < 1e-15);
      CHECK(r.links[i].offset_orientation.angularDistance(m.links[i].offset_orientation) < 1e-12);
    }
    REQUIRE(r.joint_limits.size() == m.joint_limits.size());
    for (size_t j = 0; j < m.joint_limits.size(); ++j) {
      CHECK(r.joint_limits[j].lower == doctest::Approx(m.joint_limits[j].lower));
      CHECK(r.joint_limits[j].upper == doctest::Approx(m.joint_limits[j].upper));
      CHECK(r.joint_limits[j].velocity == doctest::Approx(m.joint_limits[j].velocity));
      CHECK(r.joint_limits[j].torque == doctest::Approx(m.joint_limits[j].torque));
    }
    REQUIRE(r.keypoints.size() == m.keypoints.size());
    for (size_t k = 0; k < m.keypoints.size(); ++k) {
      CHECK(r.keypoints[k].name == m.keypoints[k].name);
      CHECK(r.keypoints[k].link == m.keypoints[k].link);
      CHECK((r.keypoints[k].offset - m.keypoints[k].offset).norm() < 1e-15);
    }
    CHECK(r.keypoint_adjacency == m.keypoint_adjacency);
    REQUIRE(r.contact_points.size() == m.contact_points.size());
    for (size_t c = 0; c < m.contact_points.size(); ++c) {
      CHECK(r.contact_points[c].name == m.contact_points[c].name);
      CHECK(r.contact_points[c].link == m.contact_points[c].link);
      CHECK(r.contact_points[c].group == m.contact_points[c].group);
      CHECK((r.contact_points[c].offset - m.contact_points[c].offset).norm() < 1e-15);
    }
    CHECK(r.friction == doctest::Approx(m.friction));
    CHECK((r.gravity - m.gravity).norm() < 1e-15);
    CHECK(validate_model(r).valid());
  }
}

TEST_CASE("load rejects a parent index that is not smaller than the link's own") {
  std::string doc = serialize_model(models::planar_biped());
  doc = replace_once(doc, "\"parent\": 0", "\"parent\": 3");
  CHECK_THROWS_WITH_AS(load_model(doc), doctest::Contains("tree structure"), InvariantError);
}

TEST_CASE("load rejects a zero-mass link naming the mass rule") {
  std::string doc = serialize_model(models::planar_biped());
  doc = replace_once(doc, "\"mass\": 1.0", "\"mass\": 0.0");
  CHECK_THROWS_WITH_AS(load_model(doc), doctest::Contains("mass"), InvariantError);
}

TEST_CASE("load reports malformed documents as parse errors") {
  CHECK_THROWS_AS(load_model("not json"), ParseError);
  CHECK_THROWS_AS(load_model("[1, 2]"), ParseError);
  CHECK_THROWS_WITH_AS(load_model("{\"name\": \"x\"}"), doctest::Contains("links"), ParseError);
  std::string doc = serialize_model(models::planar_biped());
  CHECK_THROWS_AS(load_model(replace_once(doc, "\"axis\": [\n", "\"axis\": [\n99,")), ParseError);
}

TEST_CASE("validate reports a non-SPD inertia") {
  RobotModel m = models::planar_biped();
  m.links[1].inertia(0, 0) = -1.0;
  ValidationReport report = validate_model(m);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].find("not SPD") != std::string::npos);
}

TEST_CASE("validate reports a duplicate adjacency edge once") {
  RobotModel m = models::planar_biped();
  auto [a, b] = m.keypoint_adjacency.front();
  m.keypoint_adjacency.emplace_back(b, a);  // same undirected edge
  ValidationReport report = validate_model(m);
  REQUIRE(report.violations.size() == 1);
  CHECK(report.violations[0].find("duplicate edge") != std::string::npos);
}

TEST_CASE("validate reports self-loops, bad indices and bad limits") {
  RobotModel m = models::planar_biped();
  m.keypoint_adjacency.emplace_back(1, 1);
  m.keypoints[0].link = 99;
  m.contact_points[0].link = -1;
  m.joint_limits[0].lower = m.joint_limits[0].upper;
  m.joint_limits[1].velocity = 0.0;
  m.joint_limits[2].torque = -1.0;
  m.friction = 0.0;
  ValidationReport report = validate_model(m);
  CHECK(report.violations.size() == 7);
}

TEST_CASE("quaternions are normalized on load") {
  std::string doc = serialize_model(models::planar_biped());
  doc = replace_once(doc, "\"orientation\": [\n        1.0,", "\"orientation\": [\n        2.0,");
  RobotModel m = load_model(doc);
  CHECK(m.links[1].offset_orientation.norm() == doctest::Approx(1.0));
  CHECK(validate_model(m).valid());
}
