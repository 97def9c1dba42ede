#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cvlab/cartoon.hpp"
#include "cvlab/error.hpp"
#include "cvlab/experiments.hpp"
#include "cvlab/frame.hpp"
#include "cvlab/nla.hpp"

namespace py = pybind11;
using namespace cvlab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

SampledField field_from(const Array& a) {
  if (a.ndim() != 2) throw DimensionError("expected a 2-D array");
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  return SampledField::from_real(GridSpec::cell_centered(rows, cols, {1.0, static_cast<double>(rows) / cols}),
                                 std::span<const double>(a.data(), a.size()));
}

Array array_from(const SampledField& f) {
  Array out({f.rows(), f.cols()});
  auto* p = out.mutable_data();
  const auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i].real();
  return out;
}

Array band_array(const Band& b) {
  Array out({b.py, b.px});
  std::copy(b.values.begin(), b.values.end(), out.mutable_data());
  return out;
}

FrameSpec spec_for(const SampledField& f, int j0, int base_angles, int smoothness) {
  return FrameSpec::for_grid(f.grid(), j0, base_angles, smoothness);
}

py::dict table_dict(const CoefficientTable& t) {
  py::dict d;
  d["coarse"] = band_array(t.coarse);
  py::list bands;
  for (const auto& b : t.bands) bands.append(py::make_tuple(b.j, b.l, band_array(b)));
  d["bands"] = bands;
  d["j0"] = t.spec.j0;
  d["j_max"] = t.spec.j_max;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Curvelet frame, cartoon models and experiment runners";

  // Translators run newest first, so the subclass is registered last.
  const auto base = py::register_exception<Error>(m, "CvlabError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def("build_info", [] { return build_info().dump(); }, "Version information as JSON text.");
  m.def("commands", &experiment_commands);
  m.def("default_config", [](const std::string& cmd) { return default_config(cmd).dump(); },
        py::arg("command"), "Default config of a command as JSON text.");
  m.def(
      "run",
      [](const std::string& cmd, const std::string& config_json, unsigned threads) {
        ExperimentOutput out;
        {
          py::gil_scoped_release release;
          const auto cfg = resolve_config(cmd, nlohmann::ordered_json::parse(config_json));
          out = run_experiment(cmd, cfg, threads);
        }
        return py::make_tuple(out.pass, out.summary, out.report.dump(), out.files);
      },
      py::arg("command"), py::arg("config_json") = "{}", py::arg("threads") = 1,
      "Runs a command; returns (pass, summary, report JSON, {file name: text}).");

  m.def(
      "rasterize",
      [](const std::string& model, std::size_t n) {
        const auto f = model.starts_with("{") ? model_from_json_text(model) : named_model(model);
        return array_from(rasterize(f, GridSpec::unit(n)));
      },
      py::arg("model"), py::arg("n"), "Samples a named model (or model JSON) on the n x n unit grid.");

  m.def(
      "forward",
      [](const Array& a, int j0, int base_angles, int smoothness) {
        const auto f = field_from(a);
        return table_dict(CurveletFrame(spec_for(f, j0, base_angles, smoothness)).forward(f));
      },
      py::arg("field"), py::arg("j0") = 2, py::arg("base_angles") = 16, py::arg("smoothness") = 5,
      "Tight-frame coefficients on the unit-width grid: {'coarse', 'bands': [(j, l, array)], 'j0', 'j_max'}.");

  m.def(
      "round_trip",
      [](const Array& a, int j0, int base_angles) {
        const auto f = field_from(a);
        const CurveletFrame frame(spec_for(f, j0, base_angles, 5));
        return array_from(frame.inverse(frame.forward(f)));
      },
      py::arg("field"), py::arg("j0") = 2, py::arg("base_angles") = 16);

  m.def(
      "coefficient",
      [](const Array& a, double scale, double theta, double b1, double b2) {
        const auto f = field_from(a);
        return coefficient(f, FrameSpec::for_grid(f.grid()), {scale, theta, {b1, b2}});
      },
      py::arg("field"), py::arg("a"), py::arg("theta"), py::arg("b1"), py::arg("b2"),
      "Complex coefficient <f, gamma_even> + i <f, gamma_odd> on the unit-width grid.");

  m.def(
      "mterm_errors",
      [](const Array& a, const std::vector<std::size_t>& Ms) {
        const auto f = field_from(a);
        NlaOptions o;
        o.Ms = Ms;
        o.window = {Ms.empty() ? 0 : Ms.front(), Ms.empty() ? 0 : Ms.back()};
        return nla_curve(f, FrameSpec::for_grid(f.grid()), o).errors;
      },
      py::arg("field"), py::arg("Ms"), "Squared L2 errors of M-term approximations for ascending Ms.");
}
