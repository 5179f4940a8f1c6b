#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "nlsp/checkpoint.hpp"
#include "nlsp/dissipation.hpp"
#include "nlsp/evolution.hpp"
#include "nlsp/runner.hpp"

namespace py = pybind11;
using namespace nlsp;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

std::vector<py::ssize_t> shape_of(const Grid& g) {
  const py::ssize_t m = g.points_per_axis();
  if (g.dim() == 1) return {m};
  return {m, m};
}

Grid grid_for(const py::buffer_info& info) {
  if (info.ndim == 1) return Grid(1, static_cast<int>(info.shape[0]));
  if (info.ndim == 2 && info.shape[0] == info.shape[1]) return Grid(2, static_cast<int>(info.shape[0]));
  throw py::value_error("expected a length-M or M x M array");
}

SpectralField from_samples(const RealArray& samples) {
  const py::buffer_info info = samples.request();
  const Grid grid = grid_for(info);
  return forward_transform(grid, std::span(static_cast<const double*>(info.ptr), grid.size()));
}

RealArray to_samples(const SpectralField& u) {
  const std::vector<double> x = inverse_transform(u);
  RealArray out(shape_of(u.grid()));
  std::copy(x.begin(), x.end(), out.mutable_data());
  return out;
}

ComplexArray coefficients(const SpectralField& u) {
  ComplexArray out(shape_of(u.grid()));
  std::copy(u.coeffs().begin(), u.coeffs().end(), out.mutable_data());
  return out;
}

py::dict trajectory_dict(const TrajectoryRecord& r) {
  const std::size_t n = r.samples.size();
  std::map<std::string, RealArray> cols;
  const char* names[] = {"t", "l2_norm", "h1_seminorm", "l2_mean_x1", "l2_perp", "blowup_energy", "energy_residual"};
  for (const char* name : names) cols.emplace(name, RealArray(static_cast<py::ssize_t>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    const TrajectorySample& s = r.samples[i];
    cols["t"].mutable_at(i) = s.t;
    cols["l2_norm"].mutable_at(i) = s.l2_norm;
    cols["h1_seminorm"].mutable_at(i) = s.h1_seminorm;
    cols["l2_mean_x1"].mutable_at(i) = s.l2_mean_x1;
    cols["l2_perp"].mutable_at(i) = s.l2_perp;
    cols["blowup_energy"].mutable_at(i) = s.blowup_energy;
    cols["energy_residual"].mutable_at(i) = s.energy_residual;
  }
  py::dict d;
  for (auto& [k, v] : cols) d[k.c_str()] = v;
  return d;
}

}  // namespace

PYBIND11_MODULE(_nlsp, m) {
  m.doc() = "Pseudo-spectral solver for advected nonlocal semilinear heat equations on the torus";

  py::class_<Grid>(m, "Grid")
      .def(py::init<int, int>(), py::arg("dim"), py::arg("points_per_axis"))
      .def_property_readonly("dim", &Grid::dim)
      .def_property_readonly("points_per_axis", &Grid::points_per_axis)
      .def_property_readonly("size", &Grid::size)
      .def("__repr__", [](const Grid& g) {
        return "Grid(dim=" + std::to_string(g.dim()) + ", points_per_axis=" + std::to_string(g.points_per_axis()) + ")";
      });

  py::class_<SpectralField>(m, "SpectralField")
      .def(py::init<Grid>())
      .def_static("from_samples", &from_samples, py::arg("samples"),
                  "Forward transform of real samples on a length-M or M x M grid.")
      .def_property_readonly("grid", &SpectralField::grid)
      .def("samples", &to_samples)
      .def("coefficients", &coefficients)
      .def("__getitem__", [](const SpectralField& u, std::pair<int, int> k) { return u[{k.first, k.second}]; })
      .def("__setitem__",
           [](SpectralField& u, std::pair<int, int> k, Complex c) { u[{k.first, k.second}] = c; })
      .def_property("mean_zero", &SpectralField::is_mean_zero, &SpectralField::set_mean_zero)
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(double() * py::self)
      .def(py::self * double());

  m.def("heat_semigroup", &heat_semigroup, py::arg("u"), py::arg("t"), py::arg("kappa") = 1.0);
  m.def("l2_norm", &l2_norm);
  m.def("h1_seminorm", &h1_seminorm);
  m.def(
      "sobolev_norm", [](const SpectralField& u, double s, bool homogeneous) { return sobolev_norm(u, {s, homogeneous}); },
      py::arg("u"), py::arg("s"), py::arg("homogeneous") = false);
  m.def("project_mean_zero", &project_mean_zero);
  m.def("random_band_field", &random_band_field, py::arg("grid"), py::arg("k_max"), py::arg("amplitude"),
        py::arg("seed"));

  py::class_<FlowSpec>(m, "Flow")
      .def_static("zero", [] { return FlowSpec{}; })
      .def_static(
          "shear_sine", [](double a, int samples) { return FlowSpec{ShearFlow::sine(a, samples)}; },
          py::arg("amplitude") = 1.0, py::arg("samples") = 64)
      .def_static(
          "shear_sine_cubed", [](double a, int samples) { return FlowSpec{ShearFlow::sine_cubed(a, samples)}; },
          py::arg("amplitude") = 1.0, py::arg("samples") = 64)
      .def_static(
          "shear_profile",
          [](std::vector<double> profile, int order) {
            ShearFlow s{std::move(profile), order};
            if (order <= 0) s.critical_order = shear_critical_order(s.profile);
            return FlowSpec{s};
          },
          py::arg("profile"), py::arg("critical_order") = 0)
      .def_static(
          "cellular", [](double a, double l) { return FlowSpec{make_cellular(a, l)}; }, py::arg("amplitude"),
          py::arg("cell_scale") = 1.0)
      .def_static("rescaled", &make_rescaled, py::arg("base"), py::arg("amplitude"))
      .def_property_readonly("name", &FlowSpec::name)
      .def_property_readonly("steady", &FlowSpec::is_steady)
      .def("sample", [](const FlowSpec& f, const Grid& g, double t) {
        const VelocitySample v = evaluate_flow(f, g, t);
        py::list out;
        for (const auto& c : v.components) {
          RealArray a(shape_of(g));
          std::copy(c.begin(), c.end(), a.mutable_data());
          out.append(a);
        }
        return out;
      }, py::arg("grid"), py::arg("t") = 0.0);

  py::enum_<Scheme>(m, "Scheme").value("ETD1", Scheme::Etd1).value("ETDRK2", Scheme::Etdrk2);
  py::enum_<EquationForm>(m, "EquationForm")
      .value("STANDARD", EquationForm::Standard)
      .value("SHEAR", EquationForm::Shear);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("nu", &SolverConfig::nu)
      .def_readwrite("p", &SolverConfig::p)
      .def_readwrite("dt", &SolverConfig::dt)
      .def_readwrite("t_end", &SolverConfig::t_end)
      .def_readwrite("flow", &SolverConfig::flow)
      .def_readwrite("dealias_fraction", &SolverConfig::dealias_fraction)
      .def_readwrite("blowup_threshold", &SolverConfig::blowup_threshold)
      .def_readwrite("enforce_mean_zero", &SolverConfig::enforce_mean_zero)
      .def_readwrite("form", &SolverConfig::form)
      .def_readwrite("scheme", &SolverConfig::scheme)
      .def_readwrite("nonlinear", &SolverConfig::nonlinear);

  m.def(
      "integrate",
      [](const SpectralField& u0, const SolverConfig& config, int sample_every) {
        std::optional<IntegrationResult> result;
        {
          py::gil_scoped_release release;
          result = integrate(u0, config, {sample_every, 0.0, {}});
        }
        const IntegrationResult& r = *result;
        py::dict out;
        out["status"] = r.status.label();
        out["t"] = r.status.t;
        out["norm"] = r.status.norm;
        out["steps"] = r.steps;
        out["trajectory"] = trajectory_dict(r.trajectory);
        out["final_state"] = r.final_state;
        return out;
      },
      py::arg("u0"), py::arg("config"), py::arg("sample_every") = 1,
      "Integrate to config.t_end or until blow-up. Returns a dict with status, t, norm, steps, "
      "trajectory (column arrays) and final_state.");

  m.def("blowup_energy", &blowup_energy, py::arg("u"), py::arg("p"));
  m.def("blowup_threshold_amplitude", &blowup_threshold_amplitude, py::arg("phi"), py::arg("p"));
  m.def("smallness_threshold", &smallness_threshold, py::arg("p"), py::arg("c_p"));
  m.def(
      "shear_decompose",
      [](const SpectralField& u) {
        ShearParts s = shear_decompose(u);
        return py::make_tuple(s.mean_part, s.perp_part);
      },
      py::arg("u"));

  m.def(
      "dissipation_time",
      [](const FlowSpec& flow, double nu, int truncation, double tol, bool check_truncation) {
        DissipationOptions o;
        o.tol = tol;
        o.check_truncation = check_truncation;
        DissipationTimeResult r;
        {
          py::gil_scoped_release release;
          r = dissipation_time(flow, nu, truncation, o);
        }
        py::dict out;
        out["tau_star"] = r.tau_star;
        out["truncation"] = r.truncation;
        out["norm_curve"] = r.norm_curve;
        out["norm_at_tau"] = r.norm_at_tau;
        if (r.truncation_checked) {
          out["tau_star_refined"] = r.tau_star_refined;
          out["truncation_converged"] = r.truncation_converged;
        }
        return out;
      },
      py::arg("flow"), py::arg("nu"), py::arg("truncation"), py::arg("tol") = 1e-6,
      py::arg("check_truncation") = false);

  m.def(
      "enhanced_dissipation_fit",
      [](const FlowSpec& flow, std::vector<double> nus, int k2_max, double min_decades) {
        const auto* shear = std::get_if<ShearFlow>(&flow.variant);
        if (!shear) throw py::value_error("enhanced_dissipation_fit needs a shear flow");
        EnhancedDissipationOptions o;
        o.k2_max = k2_max;
        o.min_decades = min_decades;
        EnhancedDissipationFit f;
        {
          py::gil_scoped_release release;
          f = enhanced_dissipation_fit(*shear, nus, o);
        }
        py::dict out;
        out["exponent"] = f.exponent;
        out["prefactor"] = f.prefactor;
        out["r_squared"] = f.r_squared;
        std::vector<double> rates;
        for (const auto& r : f.rates) rates.push_back(r.rate);
        out["rates"] = rates;
        return out;
      },
      py::arg("flow"), py::arg("nus"), py::arg("k2_max") = 128, py::arg("min_decades") = 1.5);

  m.def(
      "pure_transport_mixing",
      [](const SpectralField& u0, const FlowSpec& flow, std::vector<double> times) {
        const auto* shear = std::get_if<ShearFlow>(&flow.variant);
        if (!shear) throw py::value_error("pure_transport_mixing needs a shear flow");
        return pure_transport_mixing(u0, *shear, times);
      },
      py::arg("u0"), py::arg("flow"), py::arg("times"));

  m.def(
      "run_config",
      [](const std::string& text) {
        const RunConfig cfg = parse_config(text);
        RunOutcome o;
        {
          py::gil_scoped_release release;
          o = run(cfg);
        }
        py::dict out;
        out["status"] = o.status;
        out["exit_code"] = o.exit_code;
        out["metrics"] = o.metrics;
        out["error"] = o.error;
        out["files"] = o.files;
        return out;
      },
      py::arg("json_text"), "Parse a JSON run config and execute it.");

  m.def(
      "save_checkpoint",
      [](const SpectralField& u, const std::filesystem::path& path, double nu, double p, double t) {
        save_checkpoint(u, {nu, p, t}, path);
      },
      py::arg("u"), py::arg("path"), py::arg("nu") = 1.0, py::arg("p") = 1.5, py::arg("t") = 0.0);
  m.def(
      "load_checkpoint",
      [](const std::filesystem::path& path) {
        LoadedCheckpoint c = load_checkpoint(path);
        py::dict meta;
        meta["nu"] = c.meta.nu;
        meta["p"] = c.meta.p;
        meta["t"] = c.meta.t;
        return py::make_tuple(c.field, meta);
      },
      py::arg("path"));

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);
}
