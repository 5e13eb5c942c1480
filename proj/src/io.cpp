#include "retarget/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace retarget {

namespace {

struct Line {
  int number = 0;  // 1-based position in the source text
  std::vector<std::string> tokens;
};

/// Tokenized content lines; blank lines and '#' comments are skipped.
std::vector<Line> content_lines(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream stream(text);
  std::string raw;
  int number = 0;
  while (std::getline(stream, raw)) {
    ++number;
    Line line;
    line.number = number;
    std::istringstream tokens(raw);
    std::string token;
    while (tokens >> token) line.tokens.push_back(token);
    if (line.tokens.empty() || line.tokens.front()[0] == '#') continue;
    lines.push_back(std::move(line));
  }
  return lines;
}

[[noreturn]] void fail(const Line& line, const std::string& message) {
  throw ParseError("line " + std::to_string(line.number) + ": " + message);
}

double parse_double(const Line& line, const std::string& token) {
  char* end = nullptr;
  const double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    fail(line, "expected a number, got '" + token + "'");
  return value;
}

int parse_int(const Line& line, const std::string& token) {
  char* end = nullptr;
  const long value = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0')
    fail(line, "expected an integer, got '" + token + "'");
  return static_cast<int>(value);
}

void expect_tokens(const Line& line, size_t count, const std::string& what) {
  if (line.tokens.size() != count)
    fail(line, what + " expects " + std::to_string(count - 1) + " values, got " +
                   std::to_string(line.tokens.size() - 1));
}

const Line& header_line(const std::vector<Line>& lines, const std::string& keyword) {
  if (lines.empty()) throw ParseError("line 1: empty document");
  const Line& head = lines.front();
  if (head.tokens.front() != keyword)
    fail(head, "expected '" + keyword + "' header, got '" + head.tokens.front() + "'");
  return head;
}

double parse_dt(const Line& head, const std::string& token) {
  const double dt = parse_double(head, token);
  if (dt <= 0.0) fail(head, "dt must be positive");
  return dt;
}

void check_frame_count(const std::vector<Line>& lines, size_t consumed, int T) {
  const int given = static_cast<int>(lines.size() - consumed);
  if (given != T)
    throw ParseError("line " + std::to_string(lines.back().number) +
                     ": header declares " + std::to_string(T) + " frames, found " +
                     std::to_string(given));
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  out << content;
  if (!out) throw Error("failed writing file: " + path);
}

KeypointTrajectory load_keypoints(const std::string& text) {
  const std::vector<Line> lines = content_lines(text);
  const Line& head = header_line(lines, "keypoints");
  expect_tokens(head, 4, "keypoints header");
  const int m = parse_int(head, head.tokens[1]);
  const int T = parse_int(head, head.tokens[2]);
  if (m < 1) fail(head, "keypoint count must be positive");
  if (T < 0) fail(head, "frame count must be non-negative");

  KeypointTrajectory x;
  x.dt = parse_dt(head, head.tokens[3]);

  size_t at = 1;
  if (lines.size() > at && lines[at].tokens.front() == "names") {
    const Line& names = lines[at++];
    expect_tokens(names, 1 + m, "names");
    x.names.assign(names.tokens.begin() + 1, names.tokens.end());
  }
  if (lines.size() > at && lines[at].tokens.front() == "edges") {
    const Line& edges = lines[at++];
    if (edges.tokens.size() < 2) fail(edges, "edges expects a count");
    const int count = parse_int(edges, edges.tokens[1]);
    expect_tokens(edges, 2 + 2 * count, "edges list");
    for (int e = 0; e < count; ++e) {
      const int a = parse_int(edges, edges.tokens[2 + 2 * e]);
      const int b = parse_int(edges, edges.tokens[3 + 2 * e]);
      if (a < 0 || a >= m || b < 0 || b >= m)
        fail(edges, "edge endpoint out of range");
      x.adjacency.emplace_back(a, b);
    }
  }

  check_frame_count(lines, at, T);
  x.frames.reserve(T);
  for (size_t i = at; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (line.tokens.front() != "frame")
      fail(line, "expected 'frame', got '" + line.tokens.front() + "'");
    expect_tokens(line, 1 + 3 * m, "frame");
    KeypointSet set;
    set.positions.resize(m, 3);
    for (int k = 0; k < m; ++k)
      for (int c = 0; c < 3; ++c)
        set.positions(k, c) = parse_double(line, line.tokens[1 + 3 * k + c]);
    x.frames.push_back(std::move(set));
  }
  return x;
}

std::string serialize_keypoints(const KeypointTrajectory& x) {
  const int m = x.m();
  if (m < 1) throw InvariantError("cannot serialize an empty keypoint set");
  if (x.dt <= 0.0) throw InvariantError("dt must be positive");
  if (!x.names.empty() && static_cast<int>(x.names.size()) != m)
    throw DimensionError("have " + std::to_string(x.names.size()) + " names for " +
                         std::to_string(m) + " keypoints");
  std::string out = "keypoints " + std::to_string(m) + " " + std::to_string(x.T()) +
                    " " + format_double(x.dt) + "\n";
  if (!x.names.empty()) {
    out += "names";
    for (const std::string& name : x.names) out += " " + name;
    out += "\n";
  }
  if (!x.adjacency.empty()) {
    out += "edges " + std::to_string(x.adjacency.size());
    for (const auto& [a, b] : x.adjacency) {
      if (a < 0 || a >= m || b < 0 || b >= m)
        throw InvariantError("edge endpoint out of range");
      out += " " + std::to_string(a) + " " + std::to_string(b);
    }
    out += "\n";
  }
  for (const KeypointSet& frame : x.frames) {
    if (frame.m() != m) throw DimensionError("frames have differing keypoint counts");
    out += "frame";
    for (int k = 0; k < m; ++k)
      for (int c = 0; c < 3; ++c) out += " " + format_double(frame.positions(k, c));
    out += "\n";
  }
  return out;
}

ContactSequence load_contacts(const std::string& text) {
  const std::vector<Line> lines = content_lines(text);
  const Line& head = header_line(lines, "contacts");
  expect_tokens(head, 4, "contacts header");
  const int n_groups = parse_int(head, head.tokens[1]);
  const int T = parse_int(head, head.tokens[2]);
  if (n_groups < 1) fail(head, "group count must be positive");
  if (T < 0) fail(head, "frame count must be non-negative");

  ContactSequence seq;
  seq.dt = parse_dt(head, head.tokens[3]);

  size_t at = 1;
  if (lines.size() > at && lines[at].tokens.front() == "groups") {
    const Line& groups = lines[at++];
    expect_tokens(groups, 1 + n_groups, "groups");
    seq.groups.assign(groups.tokens.begin() + 1, groups.tokens.end());
  }

  check_frame_count(lines, at, T);
  seq.flags.resize(T, n_groups);
  for (size_t i = at; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (line.tokens.front() != "frame")
      fail(line, "expected 'frame', got '" + line.tokens.front() + "'");
    expect_tokens(line, 1 + n_groups, "frame");
    for (int g = 0; g < n_groups; ++g) {
      const std::string& token = line.tokens[1 + g];
      if (token != "0" && token != "1")
        fail(line, "contact flags must be 0 or 1, got '" + token + "'");
      seq.flags(static_cast<int>(i - at), g) = token == "1";
    }
  }
  return seq;
}

std::string serialize_contacts(const ContactSequence& contacts) {
  const int n_groups = contacts.n_groups();
  if (n_groups < 1) throw InvariantError("cannot serialize an empty contact grid");
  if (contacts.dt <= 0.0) throw InvariantError("dt must be positive");
  if (!contacts.groups.empty() &&
      static_cast<int>(contacts.groups.size()) != n_groups)
    throw DimensionError("have " + std::to_string(contacts.groups.size()) +
                         " labels for " + std::to_string(n_groups) + " groups");
  std::string out = "contacts " + std::to_string(n_groups) + " " +
                    std::to_string(contacts.T()) + " " + format_double(contacts.dt) +
                    "\n";
  if (!contacts.groups.empty()) {
    out += "groups";
    for (const std::string& group : contacts.groups) out += " " + group;
    out += "\n";
  }
  for (int t = 0; t < contacts.T(); ++t) {
    out += "frame";
    for (int g = 0; g < n_groups; ++g) out += contacts.flags(t, g) ? " 1" : " 0";
    out += "\n";
  }
  return out;
}

TrajectoryDocument load_trajectory(const std::string& text) {
  const std::vector<Line> lines = content_lines(text);
  const Line& head = header_line(lines, "trajectory");
  expect_tokens(head, 5, "trajectory header");
  TrajectoryDocument doc;
  doc.model_name = head.tokens[1];
  doc.n_q = parse_int(head, head.tokens[2]);
  const int T = parse_int(head, head.tokens[3]);
  if (doc.n_q < 0) fail(head, "joint count must be non-negative");
  if (T < 0) fail(head, "frame count must be non-negative");
  doc.dt = parse_dt(head, head.tokens[4]);

  check_frame_count(lines, 1, T);
  doc.configurations.reserve(T);
  for (size_t i = 1; i < lines.size(); ++i) {
    const Line& line = lines[i];
    if (line.tokens.front() != "frame")
      fail(line, "expected 'frame', got '" + line.tokens.front() + "'");
    expect_tokens(line, 1 + 7 + doc.n_q, "frame");
    Configuration q;
    for (int c = 0; c < 3; ++c)
      q.base_position[c] = parse_double(line, line.tokens[1 + c]);
    const double w = parse_double(line, line.tokens[4]);
    const double qx = parse_double(line, line.tokens[5]);
    const double qy = parse_double(line, line.tokens[6]);
    const double qz = parse_double(line, line.tokens[7]);
    q.base_orientation = Quat(w, qx, qy, qz);
    const double norm_gap = std::abs(q.base_orientation.norm() - 1.0);
    if (norm_gap > 1e-6) fail(line, "quaternion is not normalized");
    // Renormalize only off-unit inputs so written files read back bit-exactly.
    if (norm_gap > 1e-9) q.base_orientation.normalize();
    q.joints.resize(doc.n_q);
    for (int j = 0; j < doc.n_q; ++j)
      q.joints[j] = parse_double(line, line.tokens[8 + j]);
    doc.configurations.push_back(std::move(q));
  }
  return doc;
}

std::string serialize_trajectory(const TrajectoryDocument& doc) {
  if (doc.model_name.empty()) throw InvariantError("trajectory needs a model name");
  if (doc.dt <= 0.0) throw InvariantError("dt must be positive");
  std::string out = "trajectory " + doc.model_name + " " + std::to_string(doc.n_q) +
                    " " + std::to_string(doc.configurations.size()) + " " +
                    format_double(doc.dt) + "\n";
  for (const Configuration& q : doc.configurations) {
    if (q.n_q() != doc.n_q)
      throw DimensionError("frame has " + std::to_string(q.n_q()) +
                           " joints, header says " + std::to_string(doc.n_q));
    out += "frame";
    for (int c = 0; c < 3; ++c) out += " " + format_double(q.base_position[c]);
    out += " " + format_double(q.base_orientation.w());
    out += " " + format_double(q.base_orientation.x());
    out += " " + format_double(q.base_orientation.y());
    out += " " + format_double(q.base_orientation.z());
    for (int j = 0; j < doc.n_q; ++j) out += " " + format_double(q.joints[j]);
    out += "\n";
  }
  return out;
}

TrajectoryDocument to_document(const RobotModel& model, const Trajectory& trajectory) {
  TrajectoryDocument doc;
  doc.model_name = model.name;
  doc.n_q = model.num_joints();
  doc.dt = trajectory.dt;
  doc.configurations = configurations(trajectory);
  return doc;
}

KeypointTrajectory load_keypoints_file(const std::string& path) {
  return load_keypoints(read_file(path));
}

ContactSequence load_contacts_file(const std::string& path) {
  return load_contacts(read_file(path));
}

TrajectoryDocument load_trajectory_file(const std::string& path) {
  return load_trajectory(read_file(path));
}

}  // namespace retarget
