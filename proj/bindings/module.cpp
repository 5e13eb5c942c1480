#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "retarget/fixtures.hpp"
#include "retarget/pipeline.hpp"

namespace py = pybind11;
using namespace retarget;

namespace {

// Quaternions cross the boundary scalar-first (w, x, y, z), matching the
// trajectory file format.

Configuration to_configuration(const RobotModel& model, py::array_t<double> base_pos,
                               py::array_t<double> base_quat, py::array_t<double> joints) {
  auto p = base_pos.unchecked<1>();
  auto r = base_quat.unchecked<1>();
  auto j = joints.unchecked<1>();
  if (p.shape(0) != 3) throw DimensionError("base position must have 3 entries");
  if (r.shape(0) != 4) throw DimensionError("base quaternion must have 4 entries");
  if (j.shape(0) != model.num_joints())
    throw DimensionError("joint vector has " + std::to_string(j.shape(0)) +
                         " entries, model has " + std::to_string(model.num_joints()));
  Configuration q;
  q.base_position = Vec3(p(0), p(1), p(2));
  q.base_orientation = Quat(r(0), r(1), r(2), r(3)).normalized();
  q.joints = VecX(model.num_joints());
  for (int i = 0; i < model.num_joints(); ++i) q.joints[i] = j(i);
  return q;
}

std::vector<Configuration> to_configurations(const RobotModel& model,
                                             py::array_t<double> base_pos,
                                             py::array_t<double> base_quat,
                                             py::array_t<double> joints) {
  auto p = base_pos.unchecked<2>();
  auto r = base_quat.unchecked<2>();
  auto j = joints.unchecked<2>();
  const py::ssize_t T = p.shape(0);
  if (r.shape(0) != T || j.shape(0) != T)
    throw DimensionError("trajectory arrays disagree on the frame count");
  if (p.shape(1) != 3 || r.shape(1) != 4 || j.shape(1) != model.num_joints())
    throw DimensionError("trajectory arrays have wrong widths");
  std::vector<Configuration> qs(static_cast<size_t>(T));
  for (py::ssize_t t = 0; t < T; ++t) {
    qs[t].base_position = Vec3(p(t, 0), p(t, 1), p(t, 2));
    qs[t].base_orientation = Quat(r(t, 0), r(t, 1), r(t, 2), r(t, 3)).normalized();
    qs[t].joints = VecX(model.num_joints());
    for (int i = 0; i < model.num_joints(); ++i) qs[t].joints[i] = j(t, i);
  }
  return qs;
}

py::dict configurations_to_dict(const std::vector<Configuration>& qs, double dt) {
  const py::ssize_t T = static_cast<py::ssize_t>(qs.size());
  const py::ssize_t n = qs.empty() ? 0 : qs.front().n_q();
  py::array_t<double> pos({T, py::ssize_t(3)});
  py::array_t<double> quat({T, py::ssize_t(4)});
  py::array_t<double> joints({T, n});
  auto p = pos.mutable_unchecked<2>();
  auto r = quat.mutable_unchecked<2>();
  auto j = joints.mutable_unchecked<2>();
  for (py::ssize_t t = 0; t < T; ++t) {
    const Configuration& q = qs[static_cast<size_t>(t)];
    for (int a = 0; a < 3; ++a) p(t, a) = q.base_position[a];
    r(t, 0) = q.base_orientation.w();
    r(t, 1) = q.base_orientation.x();
    r(t, 2) = q.base_orientation.y();
    r(t, 3) = q.base_orientation.z();
    for (py::ssize_t i = 0; i < n; ++i) j(t, i) = q.joints[i];
  }
  py::dict out;
  out["base_positions"] = pos;
  out["base_quaternions"] = quat;
  out["joints"] = joints;
  out["dt"] = dt;
  return out;
}

py::array_t<double> keypoints_to_array(const KeypointTrajectory& x) {
  const py::ssize_t T = x.T(), m = x.m();
  py::array_t<double> out({T, m, py::ssize_t(3)});
  auto a = out.mutable_unchecked<3>();
  for (py::ssize_t t = 0; t < T; ++t)
    for (py::ssize_t k = 0; k < m; ++k)
      for (py::ssize_t c = 0; c < 3; ++c)
        a(t, k, c) = x.frames[static_cast<size_t>(t)].positions(k, c);
  return out;
}

KeypointTrajectory array_to_keypoints(py::array_t<double> positions,
                                      const std::vector<std::string>& names,
                                      const std::vector<std::pair<int, int>>& adjacency,
                                      double dt) {
  auto a = positions.unchecked<3>();
  if (a.shape(2) != 3) throw DimensionError("keypoint array must be (T, m, 3)");
  if (!names.empty() && static_cast<py::ssize_t>(names.size()) != a.shape(1))
    throw DimensionError("name list length disagrees with the keypoint array");
  KeypointTrajectory x;
  x.dt = dt;
  x.adjacency = adjacency;
  x.names = names;
  x.frames.resize(static_cast<size_t>(a.shape(0)));
  for (py::ssize_t t = 0; t < a.shape(0); ++t) {
    x.frames[static_cast<size_t>(t)].positions = MatX3(a.shape(1), 3);
    for (py::ssize_t k = 0; k < a.shape(1); ++k)
      for (py::ssize_t c = 0; c < 3; ++c)
        x.frames[static_cast<size_t>(t)].positions(k, c) = a(t, k, c);
  }
  return x;
}

py::dict contacts_to_dict(const ContactSequence& contacts) {
  const py::ssize_t T = contacts.T(), G = contacts.n_groups();
  py::array_t<bool> flags({T, G});
  auto f = flags.mutable_unchecked<2>();
  for (py::ssize_t t = 0; t < T; ++t)
    for (py::ssize_t g = 0; g < G; ++g) f(t, g) = contacts.flags(t, g);
  py::dict out;
  out["flags"] = flags;
  out["groups"] = contacts.groups;
  out["dt"] = contacts.dt;
  return out;
}

py::dict metrics_to_dict(const MetricsReport& m) {
  py::dict out;
  out["contact_error_rate"] = m.contact_error_rate;
  out["success"] = m.success;
  out["joints_rmse"] = m.joints_rmse;
  out["mean_position_error"] = m.mean_position_error;
  out["mean_laplacian_error"] = m.mean_laplacian_error;
  out["foot_slip"] = m.foot_slip;
  return out;
}

py::dict feasibility_to_dict(const FeasibilityReport& r) {
  py::dict out;
  out["infeasible_fraction"] = r.infeasible_fraction;
  out["worst_residual"] = r.worst_residual;
  out["worst_timestep"] = r.worst_timestep;
  out["indeterminate_count"] = r.indeterminate_count;
  const py::ssize_t T = static_cast<py::ssize_t>(r.verdicts.size());
  py::array_t<bool> feasible(T);
  py::array_t<double> residuals(T);
  auto fe = feasible.mutable_unchecked<1>();
  auto re = residuals.mutable_unchecked<1>();
  for (py::ssize_t t = 0; t < T; ++t) {
    fe(t) = r.verdicts[static_cast<size_t>(t)].feasible;
    re(t) = r.verdicts[static_cast<size_t>(t)].residual;
  }
  out["feasible"] = feasible;
  out["residuals"] = residuals;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "motion retargeting core: kinematics, feasibility, planning pipeline";

  py::class_<RobotModel>(m, "Model")
      .def_static("builtin",
                  [](const std::string& name) { return resolve_model("builtin:" + name); },
                  py::arg("name"), "mini_humanoid or planar_biped")
      .def_static("load",
                  [](const std::string& path) { return load_model_file(path); },
                  py::arg("path"))
      .def_property_readonly("name", [](const RobotModel& m) { return m.name; })
      .def_property_readonly("n_joints", &RobotModel::num_joints)
      .def_property_readonly("keypoint_names",
                             [](const RobotModel& m) {
                               std::vector<std::string> names;
                               for (const Keypoint& kp : m.keypoints) names.push_back(kp.name);
                               return names;
                             })
      .def_property_readonly("keypoint_adjacency",
                             [](const RobotModel& m) { return m.keypoint_adjacency; })
      .def_property_readonly("contact_groups", &RobotModel::contact_groups)
      .def("serialize", [](const RobotModel& m) { return serialize_model(m); })
      .def("validate",
           [](const RobotModel& m) { return validate_model(m).violations; },
           "empty list means every invariant holds")
      .def("default_stance",
           [](const RobotModel& m) {
             return configurations_to_dict({default_stance(m)}, 0.0);
           })
      .def("__repr__", [](const RobotModel& m) {
        return "<Model " + m.name + ", " + std::to_string(m.num_joints()) + " joints>";
      });

  m.def("fk",
        [](const RobotModel& model, py::array_t<double> base_pos,
           py::array_t<double> base_quat, py::array_t<double> joints) {
          const Configuration q = to_configuration(model, base_pos, base_quat, joints);
          const KeypointSet kp = keypoint_positions(model, q);
          py::array_t<double> out({kp.m(), 3});
          auto a = out.mutable_unchecked<2>();
          for (int k = 0; k < kp.m(); ++k)
            for (int c = 0; c < 3; ++c) a(k, c) = kp.positions(k, c);
          return out;
        },
        py::arg("model"), py::arg("base_position"), py::arg("base_quaternion"),
        py::arg("joints"), "world keypoint positions, (m, 3)");

  m.def("fixture",
        [](const std::string& name) {
          const Fixture fx = fixture_by_name(name);
          py::dict out;
          out["name"] = fx.name;
          out["reference"] = keypoints_to_array(fx.reference);
          out["names"] = fx.reference.names;
          out["adjacency"] = fx.reference.adjacency;
          out["dt"] = fx.reference.dt;
          out["truth_contacts"] = contacts_to_dict(fx.truth_contacts);
          out["source"] = configurations_to_dict(fx.source, fx.reference.dt);
          return out;
        },
        py::arg("name"), "squat | drift | one_foot");

  m.def("geometric_retarget",
        [](const RobotModel& model, py::array_t<double> reference,
           const std::vector<std::string>& names,
           const std::vector<std::pair<int, int>>& adjacency, double dt) {
          const KeypointTrajectory x = array_to_keypoints(reference, names, adjacency, dt);
          IkDiagnostics diag;
          const Trajectory result = geometric_retarget(model, x, IkOptions{}, &diag);
          py::dict out = configurations_to_dict(configurations(result), dt);
          out["residuals"] = diag.residuals;
          return out;
        },
        py::arg("model"), py::arg("reference"), py::arg("names"), py::arg("adjacency"),
        py::arg("dt"), "per-frame damped-least-squares fit, (T, m, 3) input");

  m.def("estimate_contacts",
        [](const RobotModel& model, py::array_t<double> base_pos,
           py::array_t<double> base_quat, py::array_t<double> joints, double dt,
           double threshold) {
          return contacts_to_dict(estimate_contacts(
              model, to_configurations(model, base_pos, base_quat, joints), dt, threshold));
        },
        py::arg("model"), py::arg("base_positions"), py::arg("base_quaternions"),
        py::arg("joints"), py::arg("dt"), py::arg("threshold") = 0.02);

  m.def("check_feasibility",
        [](const RobotModel& model, py::array_t<double> base_pos,
           py::array_t<double> base_quat, py::array_t<double> joints, double dt,
           double contact_threshold, double eps_dyn, bool anchored_base) {
          FeasibilityTolerances tol;
          tol.eps_dyn = eps_dyn;
          tol.anchored_base = anchored_base;
          return feasibility_to_dict(check_trajectory_feasibility(
              model, to_configurations(model, base_pos, base_quat, joints), dt,
              contact_threshold, tol));
        },
        py::arg("model"), py::arg("base_positions"), py::arg("base_quaternions"),
        py::arg("joints"), py::arg("dt"), py::arg("contact_threshold") = 0.02,
        py::arg("eps_dyn") = 0.0, py::arg("anchored_base") = false,
        "per-frame torque/contact-force existence check");

  m.def("combined_distance",
        [](py::array_t<double> x, py::array_t<double> x_ref,
           const std::vector<std::pair<int, int>>& adjacency, double w_p, double w_l) {
          const KeypointTrajectory a = array_to_keypoints(x, {}, adjacency, 0.0);
          const KeypointTrajectory b = array_to_keypoints(x_ref, {}, adjacency, 0.0);
          CostWeights weights;
          weights.w_p = w_p;
          weights.w_l = w_l;
          return combined_distance(a, b, build_laplacian(adjacency, a.m()), weights);
        },
        py::arg("x"), py::arg("x_ref"), py::arg("adjacency"), py::arg("w_p") = 1.0,
        py::arg("w_l") = 1.0, "w_p * spatial + w_l * deformation cost");

  m.def("default_config", [] { return serialize_pipeline_config(PipelineConfig{}); },
        "canonical config text with every default");

  m.def("run_pipeline",
        [](const std::string& config_text) {
          const PipelineConfig config = load_pipeline_config(config_text);
          const RunResult result = run(config);
          py::dict out;
          out["id"] = result.id;
          out["dir"] = result.dir;
          py::list seeds;
          for (const SeedResult& s : result.seeds) {
            py::dict sd;
            sd["seed"] = s.seed;
            sd["dir"] = s.dir;
            sd["metrics"] = metrics_to_dict(s.metrics);
            sd["feasibility"] = feasibility_to_dict(s.feasibility);
            sd["trajectory"] = configurations_to_dict(configurations(s.trajectory),
                                                      s.trajectory.dt);
            seeds.append(sd);
          }
          out["seeds"] = seeds;
          return out;
        },
        py::arg("config_text"),
        "executes a config (same text format as the CLI) and returns artifacts");

  m.def("report",
        [](const std::vector<std::string>& run_dirs) {
          const ComparisonReport rep = report(run_dirs);
          py::dict out;
          out["text"] = rep.text;
          out["json"] = rep.json;
          return out;
        },
        py::arg("run_dirs"));

  m.def("plot",
        [](const std::vector<std::string>& run_dirs, const std::string& kind,
           const std::string& out_dir) { return plot(run_dirs, kind, out_dir); },
        py::arg("run_dirs"), py::arg("kind"), py::arg("out_dir"));

  m.def("validate_trajectory",
        [](const std::string& model_path, const std::string& trajectory_path,
           double contact_threshold, double eps_dyn, bool anchored_base) {
          FeasibilityTolerances tol;
          tol.eps_dyn = eps_dyn;
          tol.anchored_base = anchored_base;
          const ValidateResult res =
              validate_trajectory_file(model_path, trajectory_path, contact_threshold, tol);
          py::dict out = feasibility_to_dict(res.report);
          out["json"] = res.json;
          return out;
        },
        py::arg("model_path"), py::arg("trajectory_path"),
        py::arg("contact_threshold") = 0.02, py::arg("eps_dyn") = 0.0,
        py::arg("anchored_base") = false);

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_ValueError);
}
