// Python bindings for januslab.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <numbers>
#include <optional>
#include <sstream>

#include "januslab/config.hpp"
#include "januslab/distill.hpp"
#include "januslab/errors.hpp"
#include "januslab/experiment.hpp"
#include "januslab/prompt.hpp"

namespace py = pybind11;
using namespace januslab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_numpy(const ImageBuffer& img) {
  Array out({img.height(), img.width(), ImageBuffer::kChannels});
  std::copy(img.data().begin(), img.data().end(), out.mutable_data());
  return out;
}

ImageBuffer from_numpy(const Array& a, ImageKind kind) {
  if (a.ndim() != 3 || a.shape(2) != ImageBuffer::kChannels) throw InvalidArgument("expected an (H, W, 3) array");
  ImageBuffer img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), kind);
  std::copy(a.data(), a.data() + a.size(), img.data().begin());
  return img;
}

ScenarioConfig scenario_from_text(const std::string& text) {
  std::istringstream in(text);
  return ScenarioConfig::from_kv(KeyValueConfig::parse(in, "<python>"));
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["a_dist"] = r.a_dist;
  d["janus_bin_count"] = r.janus_bin_count;
  d["janus_success"] = r.janus_success;
  d["template_distance"] = r.template_distance;
  d["bin_names"] = r.bin_names;
  d["alignment_peaks"] = r.alignment_peaks;
  d["peak_inside"] = r.peak_inside;
  return d;
}

ArmSpec arm_by_name(const ScenarioConfig& cfg, const std::string& name) {
  for (const auto& a : grid_arms())
    if (a.name == name) return a;
  for (const auto& a : trio_arms(cfg.ablation))
    if (a.name == name) return a;
  throw LookupError("unknown arm: " + name);
}

}  // namespace

PYBIND11_MODULE(_januslab, m) {
  m.doc() = "januslab core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<LookupError>(m, "KeyLookupError", PyExc_KeyError);

  m.def("default_config_text", &default_config_text);

  m.def(
      "clip_score", [](const Array& g, double psi) { return to_numpy(clip_score(from_numpy(g, ImageKind::gradient), psi)); },
      py::arg("score"), py::arg("psi"));

  m.def(
      "dynamic_threshold",
      [](int step, int max_step, double psi_start, double psi_end) {
        ClipSchedule s;
        s.mode = ClipMode::dynamic;
        s.psi_start = psi_start;
        s.psi_end = psi_end;
        s.max_step = max_step;
        return dynamic_threshold(step, s);
      },
      py::arg("step"), py::arg("max_step"), py::arg("psi_start") = 2.0, py::arg("psi_end") = 8.0);

  m.def(
      "pmi",
      [](const std::string& view, const std::string& word) { return pmi(view, word, example_table()); },
      py::arg("view"), py::arg("word"));

  m.def(
      "debias_prompt",
      [](const std::string& text, const std::string& view, const std::vector<std::string>& protect, double threshold) {
        PMIConfig cfg;
        cfg.threshold = threshold;
        return debias_prompt(Prompt::parse(text, protect), view, example_table(), cfg).text();
      },
      py::arg("text"), py::arg("view"), py::arg("protect") = std::vector<std::string>{}, py::arg("threshold") = 0.95);

  m.def(
      "view_prompt",
      [](double azimuth_deg, double elevation_deg) {
        return assign_view_prompt(azimuth_deg * std::numbers::pi / 180.0, elevation_deg * std::numbers::pi / 180.0, ViewBinConfig::standard());
      },
      py::arg("azimuth_deg"), py::arg("elevation_deg") = 0.0);

  py::class_<Scenario>(m, "Scenario")
      .def(py::init([](const std::string& config_text) { return build_scenario(scenario_from_text(config_text)); }),
           py::arg("config_text") = "")
      .def("reference_metrics",
           [](const Scenario& s) {
             const auto& c = s.config;
             return report_dict(
                 evaluate_field(s.reference.field, s.reference.templates, c.bins(), c.metrics, "reference").report);
           })
      .def(
          "run",
          [](const Scenario& s, const std::string& arm, std::uint64_t seed) {
            const ArmSpec spec = arm_by_name(s.config, arm);
            std::optional<ArmRun> r;
            {
              py::gil_scoped_release release;
              r.emplace(run_arm(s, spec, seed));
            }
            py::dict d = report_dict(r->evaluation.report);
            d["early_clipped"] = r->early_clipped;
            d["late_clipped"] = r->late_clipped;
            const auto bytes = encode_field(r->result.field);
            d["field"] = py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
            return d;
          },
          py::arg("arm") = "baseline", py::arg("seed") = 0)
      .def(
          "render",
          [](const Scenario& s, const py::bytes& field, double azimuth_deg, double elevation_deg) {
            const std::string raw = field;
            const VoxelField f = decode_field(std::span(reinterpret_cast<const std::uint8_t*>(raw.data()), raw.size()));
            Camera cam = s.config.metrics.camera;
            cam = make_camera(azimuth_deg * std::numbers::pi / 180.0, elevation_deg * std::numbers::pi / 180.0, cam.radius, cam.fov_y, cam.height,
                              cam.width);
            return to_numpy(render(f, cam, s.config.metrics.render));
          },
          py::arg("field"), py::arg("azimuth_deg"), py::arg("elevation_deg") = 15.0);
}
