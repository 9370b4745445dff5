#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "matmi/experiments.hpp"
#include "matmi/io.hpp"

namespace py = pybind11;
using namespace matmi;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const std::vector<double>& v) {
  Array a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

Array to_array(const std::vector<Vec2>& v) {
  Array a({static_cast<py::ssize_t>(v.size()), py::ssize_t{2}});
  auto m = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < v.size(); ++i) {
    m(i, 0) = v[i].x;
    m(i, 1) = v[i].y;
  }
  return a;
}

std::vector<double> from_array(const Array& a, std::size_t expected, const char* what) {
  if (a.ndim() != 1 || static_cast<std::size_t>(a.shape(0)) != expected)
    throw ParameterError(std::string(what) + ": expected a 1-D array of length " + std::to_string(expected));
  return {a.data(), a.data() + expected};
}

std::vector<Vec2> from_array2(const Array& a, std::size_t expected, const char* what) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != expected || a.shape(1) != 2)
    throw ParameterError(std::string(what) + ": expected an array of shape (" + std::to_string(expected) + ", 2)");
  auto r = a.unchecked<2>();
  std::vector<Vec2> out(expected);
  for (std::size_t i = 0; i < expected; ++i) out[i] = {r(i, 0), r(i, 1)};
  return out;
}

InversionConfig inversion_config(const std::string& algorithm, const py::dict& params) {
  const ExperimentConfig defaults = default_config();
  InversionConfig c = defaults.inversion(algorithm_from_string(algorithm));
  for (const auto& [k, v] : params) {
    const std::string key = py::str(k);
    if (key == "lower") c.lower = v.cast<double>();
    else if (key == "upper") c.upper = v.cast<double>();
    else if (key == "step") c.step = v.cast<double>();
    else if (key == "iterations") c.max_iterations = v.cast<int>();
    else if (key == "viscosity") c.viscosity = v.cast<double>();
    else if (key == "floor") c.current_floor = v.cast<double>();
    else if (key == "smoothing") c.smoothing_width = v.cast<double>();
    else if (key == "tolerance") c.tolerance = v.cast<double>();
    else if (key == "initial_sigma") c.initial_sigma = v.cast<double>();
    else if (key == "sigma0") c.sigma0 = v.cast<double>();
    else if (key == "scaling") c.scaling = v.cast<std::string>() == "none" ? FieldScaling::None : FieldScaling::Pointwise;
    else throw ParameterError("invert: unknown parameter '" + key + "'");
  }
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_matmi, m) {
  m.doc() = "2D magnetoacoustic tomography with magnetic induction: forward model and conductivity inversion";

  // Later registrations are tried first, so subclasses come last.
  auto param = py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", param.ptr());
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<Mesh, std::shared_ptr<Mesh>>(m, "Mesh")
      .def_property_readonly("nodes", [](const Mesh& s) { return to_array(s.nodes()); })
      .def_property_readonly("triangles",
                             [](const Mesh& s) {
                               py::array_t<int> a({static_cast<py::ssize_t>(s.triangle_count()), py::ssize_t{3}});
                               auto r = a.mutable_unchecked<2>();
                               for (std::size_t t = 0; t < s.triangle_count(); ++t)
                                 for (int k = 0; k < 3; ++k) r(t, k) = s.triangles()[t][k];
                               return a;
                             })
      .def_property_readonly("areas", [](const Mesh& s) { return to_array(s.areas()); })
      .def_property_readonly("node_count", &Mesh::node_count)
      .def_property_readonly("triangle_count", &Mesh::triangle_count)
      .def_property_readonly("h", &Mesh::h)
      .def_property_readonly("total_area", &Mesh::total_area)
      .def("write", [](const Mesh& s, const std::string& path) { write_mesh(path, s); }, py::arg("path"));

  m.def("ellipse_mesh",
        [](double ax, double ay, double h) { return std::const_pointer_cast<Mesh>(build_ellipse_mesh(ax, ay, h)); },
        py::arg("semi_axis_x"), py::arg("semi_axis_y"), py::arg("h"));
  m.def("read_mesh", [](const std::string& p) { return std::const_pointer_cast<Mesh>(read_mesh(p)); }, py::arg("path"));

  py::class_<ScalarField>(m, "ScalarField")
      .def(py::init([](std::shared_ptr<Mesh> mesh, const Array& values, const std::string& role) {
             return ScalarField(mesh, scalar_role_from_string(role), from_array(values, mesh->node_count(), "ScalarField"));
           }),
           py::arg("mesh"), py::arg("values"), py::arg("role") = "generic")
      .def_property_readonly("values", [](const ScalarField& f) { return to_array(f.values); })
      .def_property_readonly("role", [](const ScalarField& f) { return std::string(to_string(f.role)); })
      .def_property_readonly("mesh", [](const ScalarField& f) { return std::const_pointer_cast<Mesh>(f.mesh); })
      .def("write", [](const ScalarField& f, const std::string& p) { write_field(p, f); }, py::arg("path"));

  py::class_<VectorField>(m, "VectorField")
      .def(py::init([](std::shared_ptr<Mesh> mesh, const Array& values, const std::string& role) {
             return VectorField(mesh, vector_role_from_string(role),
                                from_array2(values, mesh->triangle_count(), "VectorField"));
           }),
           py::arg("mesh"), py::arg("values"), py::arg("role") = "generic")
      .def_property_readonly("values", [](const VectorField& f) { return to_array(f.values); })
      .def_property_readonly("role", [](const VectorField& f) { return std::string(to_string(f.role)); })
      .def_property_readonly("mesh", [](const VectorField& f) { return std::const_pointer_cast<Mesh>(f.mesh); })
      .def("write", [](const VectorField& f, const std::string& p) { write_field(p, f); }, py::arg("path"));

  m.def("read_scalar_field",
        [](const std::string& p, std::shared_ptr<Mesh> mesh) { return read_scalar_field(p, mesh); }, py::arg("path"),
        py::arg("mesh"));
  m.def("read_vector_field",
        [](const std::string& p, std::shared_ptr<Mesh> mesh) { return read_vector_field(p, mesh); }, py::arg("path"),
        py::arg("mesh"));

  py::class_<ExcitationSpec>(m, "Excitation")
      .def_property_readonly("a1_offset", [](const ExcitationSpec& e) { return std::make_pair(e.a1_offset.x, e.a1_offset.y); })
      .def_readwrite("b0", &ExcitationSpec::b0)
      .def_readwrite("t_pulse", &ExcitationSpec::t_pulse)
      .def("a1", [](const ExcitationSpec& e, double x, double y) {
        const Vec2 v = e.a1({x, y});
        return std::make_pair(v.x, v.y);
      });
  m.def("standard_excitation", &standard_excitation, py::arg("scale") = 1e-2);
  m.def("rotational_excitation", &rotational_excitation, py::arg("c"));

  py::class_<AcousticMedium>(m, "Medium")
      .def(py::init([](double rho0, double lambda0) { return AcousticMedium{rho0, lambda0}; }), py::arg("rho0") = 1.0,
           py::arg("lambda0") = 1.0)
      .def_readwrite("rho0", &AcousticMedium::rho0)
      .def_readwrite("lambda0", &AcousticMedium::lambda0)
      .def_property_readonly("c0", &AcousticMedium::c0);

  m.def(
      "phantom",
      [](std::shared_ptr<Mesh> mesh, double ax, double ay) {
        return evaluate_phantom(default_phantom(), mesh, Ellipse{ax, ay});
      },
      py::arg("mesh"), py::arg("semi_axis_x") = 2.0, py::arg("semi_axis_y") = 1.0,
      "Two-inclusion conductivity phantom evaluated at the mesh nodes.");

  m.def(
      "solve_potential",
      [](const ScalarField& sigma, const ExcitationSpec& exc) {
        return solve_potential(sigma, exc, {1e-12, 50000, SolverMethod::Direct});
      },
      py::arg("sigma"), py::arg("excitation"));
  m.def("current_density", &current_density, py::arg("sigma"), py::arg("potential"), py::arg("excitation"));
  m.def("lorentz_source", &lorentz_source, py::arg("current"), py::arg("excitation"), py::arg("medium"));

  py::class_<BoundaryRecord>(m, "BoundaryRecord")
      .def_readonly("dt", &BoundaryRecord::dt)
      .def_readonly("steps", &BoundaryRecord::steps)
      .def_property_readonly("sensor_count", [](const BoundaryRecord& r) { return r.sensors.size(); })
      .def_property_readonly("samples",
                             [](const BoundaryRecord& r) {
                               Array a({static_cast<py::ssize_t>(r.sensors.size()), static_cast<py::ssize_t>(r.steps)});
                               std::copy(r.samples.begin(), r.samples.end(), a.mutable_data());
                               return a;
                             })
      .def("write", [](const BoundaryRecord& r, const std::string& p) { write_record(p, r); }, py::arg("path"));
  m.def("read_record", py::overload_cast<const std::string&>(&read_record), py::arg("path"));

  m.def(
      "simulate_wave",
      [](const ScalarField& source, const AcousticMedium& medium, double ax, double ay, double grid_spacing, int sensors,
         int record_stride) {
        WaveOptions w;
        w.grid_spacing = grid_spacing;
        w.sensors = sensors;
        w.record_stride = record_stride;
        py::gil_scoped_release release;
        return simulate_wave(source, medium, Ellipse{ax, ay}, w);
      },
      py::arg("source"), py::arg("medium"), py::arg("semi_axis_x") = 2.0, py::arg("semi_axis_y") = 1.0,
      py::arg("grid_spacing") = 0.01, py::arg("sensors") = 256, py::arg("record_stride") = 1);

  m.def(
      "recover_source",
      [](const BoundaryRecord& record, std::shared_ptr<Mesh> mesh, double omega_max) {
        SourceRecoveryOptions o;
        o.omega_max = omega_max;
        py::gil_scoped_release release;
        return recover_source(record, mesh, o);
      },
      py::arg("record"), py::arg("mesh"), py::arg("omega_max") = 0.0);

  m.def(
      "recover_stream",
      [](const ScalarField& source, const ExcitationSpec& exc, const AcousticMedium& medium) {
        return recover_stream(source, exc, medium, {1e-12, 50000, SolverMethod::Direct});
      },
      py::arg("source"), py::arg("excitation"), py::arg("medium"));
  m.def("recover_current", &recover_current, py::arg("stream"));

  m.def(
      "invert",
      [](const std::string& algorithm, const VectorField& current, const ExcitationSpec& exc, const py::dict& params) {
        const InversionConfig c = inversion_config(algorithm, params);
        ReconstructionReport rep;
        ScalarField sigma;
        {
          py::gil_scoped_release release;
          switch (c.algorithm) {
            case Algorithm::OptimalControl: sigma = optimal_control_invert({current}, {exc}, c, &rep); break;
            case Algorithm::FixedPoint: sigma = fixed_point_invert(current, exc, c, &rep); break;
            case Algorithm::OrthogonalField: sigma = orthogonal_field_invert(current, exc, c, &rep); break;
          }
        }
        return py::make_tuple(sigma, report_to_json(rep, c));
      },
      py::arg("algorithm"), py::arg("current"), py::arg("excitation"), py::arg("params") = py::dict(),
      "Run one inversion ('oc', 'fp' or 'of'); returns (sigma, report_json).");

  m.def("add_noise", py::overload_cast<const VectorField&, double, std::uint64_t>(&add_noise), py::arg("current"),
        py::arg("level"), py::arg("key"));
  m.def("relative_error", &relative_error, py::arg("reconstructed"), py::arg("truth"));

  m.def(
      "sweep",
      [](const std::string& config_text, bool write_outputs) {
        const ExperimentConfig cfg = parse_config(config_text);
        PipelineOutcome o;
        {
          py::gil_scoped_release release;
          o = run_pipeline(cfg, write_outputs);
        }
        return sweep_csv(o.results);
      },
      py::arg("config_text"), py::arg("write_outputs") = false,
      "Run the noise sweep described by an INI config string; returns the CSV text.");
}
