#include "retarget/model.hpp"

#include <json.hpp>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace retarget {

using json = nlohmann::ordered_json;

double RobotModel::total_mass() const {
  double m = 0.0;
  for (const auto& link : links) m += link.mass;
  return m;
}

std::vector<std::string> RobotModel::contact_groups() const {
  std::vector<std::string> groups;
  for (const auto& cp : contact_points) {
    if (std::find(groups.begin(), groups.end(), cp.group) == groups.end()) {
      groups.push_back(cp.group);
    }
  }
  return groups;
}

std::vector<int> RobotModel::contact_group_points(const std::string& group) const {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(contact_points.size()); ++i) {
    if (contact_points[i].group == group) idx.push_back(i);
  }
  return idx;
}

std::optional<int> RobotModel::keypoint_index(const std::string& name) const {
  for (int i = 0; i < num_keypoints(); ++i) {
    if (keypoints[i].name == name) return i;
  }
  return std::nullopt;
}

namespace {

Vec3 parse_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    throw ParseError(where + ": expected an array of 3 numbers");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Quat parse_quat(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) {
    throw ParseError(where + ": expected a quaternion [w, x, y, z]");
  }
  Quat q(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
         j[3].get<double>());
  if (q.norm() < 1e-12) {
    throw ParseError(where + ": quaternion has near-zero norm");
  }
  q.normalize();  // quaternions are normalized on load
  return q;
}

Mat3 parse_inertia(const json& j, const std::string& where) {
  Mat3 I;
  if (j.is_array() && j.size() == 3 && j[0].is_array()) {
    for (int r = 0; r < 3; ++r) {
      if (j[r].size() != 3) throw ParseError(where + ": expected 3x3 matrix");
      for (int c = 0; c < 3; ++c) I(r, c) = j[r][c].get<double>();
    }
  } else if (j.is_array() && j.size() == 6) {
    // [ixx, iyy, izz, ixy, ixz, iyz]
    I << j[0].get<double>(), j[3].get<double>(), j[4].get<double>(),
        j[3].get<double>(), j[1].get<double>(), j[5].get<double>(),
        j[4].get<double>(), j[5].get<double>(), j[2].get<double>();
  } else {
    throw ParseError(where + ": expected 3x3 matrix or 6-vector inertia");
  }
  return I;
}

const json& require(const json& j, const std::string& key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(where + ": missing field '" + key + "'");
  return *it;
}

bool symmetric_positive_definite(const Mat3& I, double tol = 1e-12) {
  if ((I - I.transpose()).cwiseAbs().maxCoeff() > 1e-9) return false;
  Eigen::SelfAdjointEigenSolver<Mat3> es(I);
  return es.eigenvalues().minCoeff() > tol;
}

void collect_violations(const RobotModel& m, std::vector<std::string>& out) {
  const int n_links = static_cast<int>(m.links.size());
  if (n_links == 0) {
    out.push_back("model has no links");
    return;
  }
  if (m.links[0].parent != -1) {
    out.push_back("link 0 must be the floating base (parent -1)");
  }
  for (int i = 1; i < n_links; ++i) {
    const Link& link = m.links[i];
    if (link.parent < 0 || link.parent >= i) {
      out.push_back("tree structure violated: link " + std::to_string(i) + " ('" +
                    link.name + "') has parent index " + std::to_string(link.parent) +
                    " not smaller than its own index");
    }
    if (std::abs(link.joint_axis.norm() - 1.0) > 1e-9) {
      out.push_back("joint axis of link '" + link.name + "' is not a unit vector");
    }
  }
  for (const Link& link : m.links) {
    if (!(link.mass > 0.0)) {
      out.push_back("mass of link '" + link.name + "' must be > 0");
    }
    if (!symmetric_positive_definite(link.inertia)) {
      out.push_back("inertia of link '" + link.name + "' not SPD");
    }
    if (std::abs(link.offset_orientation.norm() - 1.0) > 1e-9) {
      out.push_back("offset orientation of link '" + link.name + "' not unit norm");
    }
  }
  if (static_cast<int>(m.joint_limits.size()) != m.num_joints()) {
    out.push_back("joint_limits size " + std::to_string(m.joint_limits.size()) +
                  " does not match joint count " + std::to_string(m.num_joints()));
  }
  for (size_t j = 0; j < m.joint_limits.size(); ++j) {
    const JointLimits& lim = m.joint_limits[j];
    if (!(lim.lower < lim.upper)) {
      out.push_back("joint " + std::to_string(j) + ": lower limit must be < upper limit");
    }
    if (!(lim.velocity > 0.0)) {
      out.push_back("joint " + std::to_string(j) + ": velocity limit must be > 0");
    }
    if (!(lim.torque > 0.0)) {
      out.push_back("joint " + std::to_string(j) + ": torque limit must be > 0");
    }
  }
  for (const Keypoint& kp : m.keypoints) {
    if (kp.link < 0 || kp.link >= n_links) {
      out.push_back("keypoint '" + kp.name + "' references invalid link index " +
                    std::to_string(kp.link));
    }
  }
  for (const ContactPoint& cp : m.contact_points) {
    if (cp.link < 0 || cp.link >= n_links) {
      out.push_back("contact point '" + cp.name + "' references invalid link index " +
                    std::to_string(cp.link));
    }
  }
  std::set<std::pair<int, int>> seen;
  const int n_kp = m.num_keypoints();
  for (const auto& [a, b] : m.keypoint_adjacency) {
    if (a < 0 || a >= n_kp || b < 0 || b >= n_kp) {
      out.push_back("adjacency edge (" + std::to_string(a) + "," + std::to_string(b) +
                    ") references invalid keypoint index");
      continue;
    }
    if (a == b) {
      out.push_back("adjacency edge (" + std::to_string(a) + "," + std::to_string(b) +
                    ") is a self-loop");
      continue;
    }
    auto key = std::minmax(a, b);
    if (!seen.insert(key).second) {
      out.push_back("duplicate edge (" + std::to_string(key.first) + "," +
                    std::to_string(key.second) + ") in keypoint adjacency");
    }
  }
  if (!(m.friction > 0.0)) {
    out.push_back("friction coefficient must be > 0");
  }
}

}  // namespace

ValidationReport validate_model(const RobotModel& model) {
  ValidationReport report;
  collect_violations(model, report.violations);
  return report;
}

RobotModel load_model_unchecked(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("model document: top level must be an object");

  RobotModel m;
  m.name = require(doc, "name", "model").get<std::string>();
  if (doc.contains("gravity")) m.gravity = parse_vec3(doc["gravity"], "gravity");
  if (doc.contains("friction")) m.friction = doc["friction"].get<double>();

  const json& links = require(doc, "links", "model");
  if (!links.is_array() || links.empty()) {
    throw ParseError("links: expected a non-empty array");
  }
  for (size_t i = 0; i < links.size(); ++i) {
    const json& jl = links[i];
    const std::string where = "links[" + std::to_string(i) + "]";
    Link link;
    link.name = require(jl, "name", where).get<std::string>();
    link.parent = require(jl, "parent", where).get<int>();
    link.mass = require(jl, "mass", where).get<double>();
    link.com = parse_vec3(require(jl, "com", where), where + ".com");
    link.inertia = parse_inertia(require(jl, "inertia", where), where + ".inertia");
    m.links.push_back(link);
  }

  const json& joints = require(doc, "joints", "model");
  if (!joints.is_array()) throw ParseError("joints: expected an array");
  if (joints.size() != links.size() - 1) {
    throw ParseError("joints: expected exactly one joint per non-base link (" +
                     std::to_string(links.size() - 1) + "), got " +
                     std::to_string(joints.size()));
  }
  for (size_t j = 0; j < joints.size(); ++j) {
    const json& jj = joints[j];
    const std::string where = "joints[" + std::to_string(j) + "]";
    const int child = require(jj, "link", where).get<int>();
    if (child != static_cast<int>(j) + 1) {
      throw ParseError(where + ": joints must be listed in link order; expected link " +
                       std::to_string(j + 1) + ", got " + std::to_string(child));
    }
    Link& link = m.links[child];
    link.joint_axis = parse_vec3(require(jj, "axis", where), where + ".axis");
    if (link.joint_axis.norm() < 1e-12) {
      throw ParseError(where + ".axis: near-zero vector");
    }
    link.joint_axis.normalize();
    link.offset_position = parse_vec3(require(jj, "position", where), where + ".position");
    link.offset_orientation = parse_quat(require(jj, "orientation", where), where + ".orientation");
    JointLimits lim;
    lim.lower = require(jj, "lower", where).get<double>();
    lim.upper = require(jj, "upper", where).get<double>();
    lim.velocity = require(jj, "velocity", where).get<double>();
    lim.torque = require(jj, "torque", where).get<double>();
    m.joint_limits.push_back(lim);
  }

  const json& kps = require(doc, "keypoints", "model");
  for (size_t k = 0; k < kps.size(); ++k) {
    const std::string where = "keypoints[" + std::to_string(k) + "]";
    Keypoint kp;
    kp.name = require(kps[k], "name", where).get<std::string>();
    kp.link = require(kps[k], "link", where).get<int>();
    kp.offset = parse_vec3(require(kps[k], "offset", where), where + ".offset");
    m.keypoints.push_back(kp);
  }

  const json& adj = require(doc, "adjacency", "model");
  for (size_t e = 0; e < adj.size(); ++e) {
    const json& je = adj[e];
    if (!je.is_array() || je.size() != 2) {
      throw ParseError("adjacency[" + std::to_string(e) + "]: expected an index pair");
    }
    m.keypoint_adjacency.emplace_back(je[0].get<int>(), je[1].get<int>());
  }

  const json& contacts = require(doc, "contacts", "model");
  for (size_t c = 0; c < contacts.size(); ++c) {
    const std::string where = "contacts[" + std::to_string(c) + "]";
    ContactPoint cp;
    cp.name = require(contacts[c], "name", where).get<std::string>();
    cp.link = require(contacts[c], "link", where).get<int>();
    cp.offset = parse_vec3(require(contacts[c], "offset", where), where + ".offset");
    cp.group = require(contacts[c], "group", where).get<std::string>();
    m.contact_points.push_back(cp);
  }

  return m;
}

RobotModel load_model(const std::string& text) {
  RobotModel m = load_model_unchecked(text);
  ValidationReport report = validate_model(m);
  if (!report.valid()) {
    std::string msg = "model invariant violation:";
    for (const auto& v : report.violations) msg += "\n  - " + v;
    throw InvariantError(msg);
  }
  return m;
}

RobotModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

namespace {

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json quat_json(const Quat& q) {
  return json::array({q.w(), q.x(), q.y(), q.z()});
}

json inertia_json(const Mat3& I) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back(json::array({I(r, 0), I(r, 1), I(r, 2)}));
  return rows;
}

}  // namespace

std::string serialize_model(const RobotModel& m) {
  json doc;
  doc["name"] = m.name;
  doc["gravity"] = vec3_json(m.gravity);
  doc["friction"] = m.friction;
  doc["links"] = json::array();
  for (const Link& link : m.links) {
    json jl;
    jl["name"] = link.name;
    jl["parent"] = link.parent;
    jl["mass"] = link.mass;
    jl["com"] = vec3_json(link.com);
    jl["inertia"] = inertia_json(link.inertia);
    doc["links"].push_back(jl);
  }
  doc["joints"] = json::array();
  for (int j = 0; j < m.num_joints(); ++j) {
    const Link& link = m.links[j + 1];
    const JointLimits& lim = m.joint_limits[j];
    json jj;
    jj["link"] = j + 1;
    jj["axis"] = vec3_json(link.joint_axis);
    jj["position"] = vec3_json(link.offset_position);
    jj["orientation"] = quat_json(link.offset_orientation);
    jj["lower"] = lim.lower;
    jj["upper"] = lim.upper;
    jj["velocity"] = lim.velocity;
    jj["torque"] = lim.torque;
    doc["joints"].push_back(jj);
  }
  doc["keypoints"] = json::array();
  for (const Keypoint& kp : m.keypoints) {
    json jk;
    jk["name"] = kp.name;
    jk["link"] = kp.link;
    jk["offset"] = vec3_json(kp.offset);
    doc["keypoints"].push_back(jk);
  }
  doc["adjacency"] = json::array();
  for (const auto& [a, b] : m.keypoint_adjacency) {
    doc["adjacency"].push_back(json::array({a, b}));
  }
  doc["contacts"] = json::array();
  for (const ContactPoint& cp : m.contact_points) {
    json jc;
    jc["name"] = cp.name;
    jc["link"] = cp.link;
    jc["offset"] = vec3_json(cp.offset);
    jc["group"] = cp.group;
    doc["contacts"].push_back(jc);
  }
  return doc.dump(2) + "\n";
}

}  // namespace retarget
