#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>
#include <vector>

#include "vrtc/classifiers.hpp"
#include "vrtc/errors.hpp"
#include "vrtc/feature_extract.hpp"
#include "vrtc/model_select.hpp"
#include "vrtc/synth_traffic.hpp"
#include "vrtc/trace_ingest.hpp"
#include "vrtc/wifi_sim.hpp"

namespace py = pybind11;
using namespace vrtc;

namespace {

// Models cross the boundary as their serialized text so python holds no
// C++ object lifetimes.
std::string train_text(const Matrix& x, const std::vector<int>& y, const std::string& family,
                       uint64_t seed, double c, int n_neighbors, const std::string& weights,
                       int max_depth, int min_samples_split, int n_estimators,
                       double var_smoothing) {
  HyperParams p;
  p.family = family_from_string(family);
  p.c = c;
  p.n_neighbors = n_neighbors;
  p.weights = weights == "distance" ? KnnWeights::Distance : KnnWeights::Uniform;
  p.max_depth = max_depth;
  p.min_samples_split = min_samples_split;
  p.n_estimators = n_estimators;
  p.var_smoothing = var_smoothing;
  const TrainedModel model = train_model(x, y, p, seed);
  std::ostringstream out;
  save_model(out, model);
  return out.str();
}

std::vector<int> predict_text(const std::string& model_text, const Matrix& rows) {
  std::istringstream in(model_text);
  return predict_batch(load_model(in), rows);
}

py::dict stats_dict(const ClassDelayStats& s) {
  py::dict d;
  d["count"] = s.count;
  d["mean_ms"] = s.mean_ms;
  d["median_ms"] = s.median_ms;
  d["p99_ms"] = s.p99_ms;
  d["max_ms"] = s.max_ms;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "VR traffic classification core";
  m.attr("__version__") = "1.0.0";

  m.def("feature_names", [] {
    const auto& names = feature_names();
    return std::vector<std::string>(names.begin(), names.end());
  });

  m.def(
      "pearson_cc",
      [](const std::vector<double>& d, const std::vector<double>& u) {
        return pearson_cc(d, u);
      },
      py::arg("dl"), py::arg("ul"));

  m.def(
      "extract_dataset",
      [](const std::string& trace_csv, int64_t omega_ms, int subsamples,
         std::optional<int> label) {
        ExtractionConfig cfg;
        cfg.omega_ms = omega_ms;
        cfg.n_subsamples = subsamples;
        const ParsedTrace parsed = parse_trace_csv_file(trace_csv);
        const auto rows = extract_dataset(parsed.records, cfg, label);
        Matrix x;
        std::vector<std::optional<int>> labels;
        for (const FeatureVector& r : rows) {
          x.emplace_back(r.values.begin(), r.values.end());
          labels.push_back(r.label);
        }
        return py::make_tuple(x, labels);
      },
      py::arg("trace_csv"), py::arg("omega_ms") = 500, py::arg("subsamples") = 20,
      py::arg("label") = std::nullopt,
      "Window a trace CSV and return (feature_rows, labels).");

  m.def("train", &train_text, py::arg("x"), py::arg("y"), py::arg("family") = "rf",
        py::arg("seed") = 0, py::arg("c") = 1.0, py::arg("n_neighbors") = 5,
        py::arg("weights") = "uniform", py::arg("max_depth") = 10,
        py::arg("min_samples_split") = 5, py::arg("n_estimators") = 50,
        py::arg("var_smoothing") = 1e-9,
        "Train a classifier and return it in the portable text form.");

  m.def("predict", &predict_text, py::arg("model_text"), py::arg("rows"));

  m.def(
      "simulate",
      [](double bg_load_mbps, const std::string& scheduler, double duration_s, double warmup_s,
         uint64_t seed) {
        SimConfig cfg;
        cfg.bg_load_mbps = bg_load_mbps;
        cfg.scheduler = scheduler_from_string(scheduler);
        cfg.duration_s = duration_s;
        cfg.warmup_s = warmup_s;
        cfg.seed = seed;
        const SimResult r = run_sim(cfg);
        py::dict d;
        d["vr"] = stats_dict(r.vr);
        d["bg"] = stats_dict(r.bg);
        d["unstable"] = r.unstable;
        d["priority_active"] = r.priority_active;
        return d;
      },
      py::arg("bg_load_mbps"), py::arg("scheduler") = "fifo", py::arg("duration_s") = 10.0,
      py::arg("warmup_s") = 1.0, py::arg("seed") = 1,
      "Run one downlink simulation and return per-class delay stats.");

  py::register_exception<ParseError>(m, "VrtcParseError", PyExc_ValueError);
  py::register_exception<ContractError>(m, "VrtcContractError", PyExc_ValueError);
  py::register_exception<IoError>(m, "VrtcIoError", PyExc_OSError);
}
