// Copyright 2026 The PulseForge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pulseforge/analysis.hpp"
#include "pulseforge/error.hpp"
#include "pulseforge/pauli.hpp"
#include "pulseforge/pulse_shape.hpp"
#include "pulseforge/scenario.hpp"
#include "pulseforge/sequence.hpp"
#include "pulseforge/sequence_io.hpp"

namespace py = pybind11;
namespace pf = pulseforge;

namespace {

py::dict series_dict(const pf::ObservableSeries& s) {
  py::dict d;
  d["times"] = s.times;
  d["values"] = s.values;
  d["stderrs"] = s.stderrs;
  d["mean"] = s.mean();
  d["realizations"] = s.realizations;
  d["basis"] = std::string(1, s.basis);
  return d;
}

py::object fit_dict(const std::optional<pf::FitResult>& f) {
  if (!f) return py::none();
  py::dict d;
  d["kind"] = f->kind == pf::FitKind::DampedCosine ? "damped-cosine" : "exponential";
  d["amplitude"] = f->amplitude;
  d["frequency"] = f->frequency;
  d["tau"] = f->tau;
  d["amplitude_err"] = f->amplitude_err;
  d["frequency_err"] = f->frequency_err;
  d["tau_err"] = f->tau_err;
  d["unbounded_tau"] = f->unbounded_tau;
  return d;
}

}  // namespace

PYBIND11_MODULE(_pulseforge, m) {
  m.doc() = "Pulse-sequence engineering and trapped-ion spin simulation";
  m.attr("__version__") = pf::engine_version();

  py::register_exception<pf::ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<pf::PreconditionError>(m, "PreconditionError", PyExc_ValueError);

  py::enum_<pf::Pauli>(m, "Pauli")
      .value("I", pf::Pauli::I)
      .value("X", pf::Pauli::X)
      .value("Y", pf::Pauli::Y)
      .value("Z", pf::Pauli::Z);

  py::class_<pf::GlobalRotation>(m, "GlobalRotation")
      .def(py::init([](double angle, double axis_phase, bool polar) {
             return pf::GlobalRotation{axis_phase, polar, angle};
           }),
           py::arg("angle"), py::arg("axis_phase") = 0.0, py::arg("polar") = false)
      .def_static("x", &pf::GlobalRotation::x)
      .def_static("y", &pf::GlobalRotation::y)
      .def_static("z", &pf::GlobalRotation::z)
      .def_readwrite("angle", &pf::GlobalRotation::angle)
      .def_readwrite("axis_phase", &pf::GlobalRotation::axis_phase)
      .def_readwrite("polar", &pf::GlobalRotation::polar)
      .def("matrix", &pf::GlobalRotation::matrix);

  py::class_<pf::PauliSum>(m, "PauliSum")
      .def(py::init<int>(), py::arg("spin_count") = 1)
      .def_static("parse", &pf::PauliSum::parse, py::arg("text"), py::arg("spin_count") = 0)
      .def_property_readonly("spin_count", &pf::PauliSum::spin_count)
      .def_property_readonly("terms", &pf::PauliSum::terms)
      .def("coefficient", &pf::PauliSum::coefficient)
      .def("add", py::overload_cast<std::string_view, pf::Complex>(&pf::PauliSum::add))
      .def("max_abs_coefficient", &pf::PauliSum::max_abs_coefficient)
      .def("is_hermitian", &pf::PauliSum::is_hermitian, py::arg("tol") = pf::kCanonicalTolerance)
      .def("to_dense", [](const pf::PauliSum& s) { return pf::to_dense_matrix(s); })
      .def("__len__", &pf::PauliSum::size)
      .def("__str__", &pf::PauliSum::to_string)
      .def("__repr__", [](const pf::PauliSum& s) { return "PauliSum(" + s.to_string() + ")"; })
      .def(py::self == py::self);

  m.def("conjugate", &pf::conjugate, py::arg("op"), py::arg("rotation"), py::arg("inverse_frame") = false);
  m.def("uniform_field", &pf::uniform_field);
  m.def("power_law_couplings", &pf::power_law_couplings);

  py::class_<pf::PulseSequence>(m, "PulseSequence")
      .def_property_readonly("name", &pf::PulseSequence::name)
      .def_property_readonly("spin_count", &pf::PulseSequence::spin_count)
      .def_property_readonly("cycle_time", &pf::PulseSequence::cycle_time)
      .def("__len__", [](const pf::PulseSequence& s) { return s.steps().size(); })
      .def("__str__", [](const pf::PulseSequence& s) { return pf::format_sequence(s); });

  py::class_<pf::DecouplingReport>(m, "DecouplingReport")
      .def_readonly("frame_closure_residual", &pf::DecouplingReport::frame_closure_residual)
      .def_readonly("segment_target_residuals", &pf::DecouplingReport::segment_target_residuals)
      .def_readonly("average_target_residual", &pf::DecouplingReport::average_target_residual)
      .def_readonly("noise_residual", &pf::DecouplingReport::noise_residual)
      .def_property_readonly("passed", &pf::DecouplingReport::pass)
      .def("__str__", &pf::DecouplingReport::to_string);

  m.def(
      "build_sequence",
      [](const std::string& name, int spins, double j0_hz, double p, double t1, double t_pi, double bx_hz,
         double by_hz, double bz_hz) {
        pf::BuilderSpec b{name, spins, j0_hz, p, std::nullopt, t1, t_pi, bx_hz, by_hz, bz_hz};
        return py::make_tuple(pf::build_named(b), pf::builder_target(b));
      },
      py::arg("name"), py::arg("spins") = 2, py::arg("j0_hz") = 1.0, py::arg("p") = 1.0, py::arg("t1") = 120e-6,
      py::arg("t_pi") = 0.0, py::arg("bx_hz") = 0.0, py::arg("by_hz") = 0.0, py::arg("bz_hz") = 0.0,
      "Returns (sequence, target) for a named builder.");
  m.def("parse_sequence", [](std::string_view text) {
    auto f = pf::parse_sequence(text);
    return py::make_tuple(f.sequence, f.target ? py::cast(*f.target) : py::none());
  });
  m.def("drop_pulse", &pf::drop_pulse);
  m.def(
      "average_hamiltonian",
      [](const pf::PulseSequence& s, const std::optional<pf::PauliSum>& noise) {
        return pf::average_hamiltonian(s, noise);
      },
      py::arg("sequence"), py::arg("noise") = std::nullopt);
  m.def("time_dilution_factor", [](const pf::PulseSequence& s) { return pf::time_dilution_factor(s); });
  m.def(
      "validate_decoupling",
      [](const pf::PulseSequence& s, const pf::PauliSum& target, const pf::PauliSum& noise, double tolerance,
         bool strict_target) {
        return pf::validate_decoupling(s, target, noise, {tolerance, strict_target});
      },
      py::arg("sequence"), py::arg("target"), py::arg("noise"), py::arg("tolerance") = 1e-10,
      py::arg("strict_target") = true);
  m.def(
      "effective_beta",
      [](double ramp, double t1, double exponent) {
        return pf::effective_beta(pf::PulseShape::tukey(ramp, t1, exponent), t1);
      },
      py::arg("ramp"), py::arg("t1"), py::arg("exponent") = 2.0);

  m.def("builtin_names", [] {
    std::vector<std::string> names;
    for (const auto& b : pf::builtin_scenarios()) names.push_back(b.name);
    return names;
  });
  m.def("builtin_config", [](const std::string& name) { return pf::builtin_scenario(name).config; });
  m.def(
      "run",
      [](const std::string& config, std::optional<std::uint64_t> seed, std::optional<int> realizations,
         int workers, const std::string& out_dir) {
        pf::RunOptions o;
        o.seed = seed;
        o.realizations = realizations;
        o.workers = workers;
        o.quiet = true;
        pf::RunOutput out;
        {
          py::gil_scoped_release release;
          out = pf::run_scenario(pf::parse_scenario_config(config), o);
          if (!out_dir.empty()) pf::write_run_output(out, out_dir);
        }
        py::dict variants;
        for (const auto& v : out.variants) {
          py::dict d;
          py::dict series;
          for (const auto& [basis, s] : v.series) series[py::str(std::string(1, basis))] = series_dict(s);
          d["series"] = series;
          d["fit"] = fit_dict(v.fit);
          d["fit_error"] = v.fit_error;
          d["j0"] = v.resolved.j0;
          d["jbar0"] = v.resolved.jbar0;
          d["seeds"] = v.seeds;
          variants[py::str(v.label)] = d;
        }
        py::dict r;
        r["name"] = out.name;
        r["variants"] = variants;
        r["series_csv"] = out.series_csv;
        r["fits_csv"] = out.fits_csv;
        r["run_json"] = out.run_json;
        return r;
      },
      py::arg("config"), py::arg("seed") = std::nullopt, py::arg("realizations") = std::nullopt,
      py::arg("workers") = 0, py::arg("out_dir") = "",
      "Runs a scenario config (JSON text) and returns per-variant series and fits.");
}
