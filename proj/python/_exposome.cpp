#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "exposome/align.hpp"
#include "exposome/classify.hpp"
#include "exposome/dbn.hpp"
#include "exposome/error.hpp"
#include "exposome/ingest.hpp"
#include "exposome/pipeline.hpp"
#include "exposome/spatial.hpp"
#include "exposome/stats.hpp"

namespace py = pybind11;
using namespace exposome;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Array to_array(const Matrix& m) {
  return Array(std::vector<py::ssize_t>{static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())},
               m.data().data());
}

Array to_array(const std::vector<double>& v) {
  return Array(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())}, v.data());
}

py::dict regression_dict(const RegressionResult& r) {
  py::dict d;
  d["response"] = r.response;
  d["predictors"] = r.predictors;
  d["coefficients"] = to_array(r.coefficients);
  d["standard_errors"] = to_array(r.standard_errors);
  d["t_stats"] = to_array(r.t_stats);
  d["p_values"] = to_array(r.p_values);
  d["residuals"] = to_array(r.residuals);
  d["fitted"] = to_array(r.fitted);
  d["r_squared"] = r.r_squared;
  d["residual_variance"] = r.residual_variance;
  d["degrees_of_freedom"] = r.degrees_of_freedom;
  return d;
}

py::dict pca_dict(const PcaResult& p) {
  py::dict d;
  d["channels"] = p.channels;
  d["means"] = to_array(p.means);
  d["eigenvalues"] = to_array(p.eigenvalues);
  d["explained_ratio"] = to_array(p.explained_ratio);
  d["loadings"] = to_array(p.loadings);
  d["scores"] = to_array(p.scores);
  d["importance"] = to_array(p.importance);
  return d;
}

py::dict table_dict(const FusedFrameTable& t) {
  py::dict d;
  d["times_s"] = t.times_s;
  d["channels"] = t.channel_names();
  d["values"] = to_array(t.values);
  d["lat"] = to_array(t.lat);
  d["lon"] = to_array(t.lon);
  d["labels"] = t.labels;
  d["excluded_channels"] = t.excluded_channels;
  return d;
}

py::dict eval_dict(const EvalReport& r) {
  py::dict d;
  d["model"] = std::string(to_string(r.model));
  d["fold_accuracies"] = r.fold_accuracies;
  d["mean_accuracy"] = r.mean_accuracy;
  d["std_accuracy"] = r.std_accuracy;
  py::list confusion;
  for (const auto& row : r.confusion) confusion.append(py::cast(std::vector<std::size_t>(row.begin(), row.end())));
  d["confusion"] = confusion;
  return d;
}

ModelKind model_kind(const std::string& name) {
  ModelKind k;
  k.type = model_type_from_string(name);
  return k;
}

}  // namespace

PYBIND11_MODULE(_exposome, m) {
  m.doc() = "DigitalExposome analysis core";

  static py::exception<Error> error(m, "ExposomeError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::handle(error.ptr())(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error.ptr(), inst.ptr());
    }
  });

  // ingest / align
  m.def(
      "synthesize_session",
      [](const std::filesystem::path& dir, std::uint64_t seed, const std::string& preset, double duration_s) {
        auto cfg = synth_preset(synth_preset_from_string(preset));
        if (duration_s > 0) cfg.duration_s = duration_s;
        return write_session(generate_synthetic_session(cfg, seed).bundle, dir);
      },
      py::arg("out_dir"), py::arg("seed") = 7, py::arg("preset") = "coupled", py::arg("duration_s") = 0.0,
      "Write a synthetic session; returns the manifest path.");
  m.def(
      "validate_session",
      [](const std::filesystem::path& manifest) {
        const auto v = validate_bundle(load_session(manifest));
        py::list channels;
        for (const auto& c : v.channels) {
          py::dict d;
          d["name"] = c.name;
          d["sample_count"] = c.sample_count;
          d["start_ms"] = c.start_ms;
          d["end_ms"] = c.end_ms;
          d["coverage_s"] = c.coverage_s;
          d["constant"] = c.constant;
          channels.append(d);
        }
        py::dict out;
        out["channels"] = channels;
        out["overlap_ms"] = v.overlap_ms;
        out["constant_channels"] = v.constant_channels();
        return out;
      },
      py::arg("manifest"));
  m.def(
      "fuse_session", [](const std::filesystem::path& manifest) { return table_dict(fuse(load_session(manifest))); },
      py::arg("manifest"), "Load, align and normalize a session into one 1 Hz table.");
  m.def(
      "interpolate_linear",
      [](double x1, double y1, double x2, double y2, double x) { return interpolate_linear({x1, y1, x2, y2}, x); },
      py::arg("x1"), py::arg("y1"), py::arg("x2"), py::arg("y2"), py::arg("x"));

  // stats
  m.def(
      "ols",
      [](const Array& x, const Array& y) {
        const auto yv = to_vector(y);
        return regression_dict(ols_regress(to_matrix(x), yv));
      },
      py::arg("x"), py::arg("y"), "Least squares with an intercept; coefficients[0] is the intercept.");
  m.def(
      "pca",
      [](const Array& x, std::vector<std::string> channels) {
        const auto mat = to_matrix(x);
        if (channels.empty())
          for (std::size_t c = 0; c < mat.cols(); ++c) channels.push_back("c" + std::to_string(c));
        return pca_dict(pca(mat, channels));
      },
      py::arg("x"), py::arg("channels") = std::vector<std::string>{});
  m.def(
      "pearson",
      [](const Array& x, const Array& y) {
        const auto a = to_vector(x), b = to_vector(y);
        return pearson(a, b);
      },
      py::arg("x"), py::arg("y"));
  m.def(
      "qq_data",
      [](const Array& residuals) {
        const auto r = to_vector(residuals);
        return qq_data(r);
      },
      py::arg("residuals"));

  // spatial
  m.def(
      "voronoi",
      [](const Array& points, const Array& values, std::array<double, 4> bbox) {
        const auto p = to_matrix(points);
        const auto v = to_vector(values);
        if (p.cols() != 2 || p.rows() != v.size()) throw py::value_error("points must be n x 2 with n values");
        std::vector<Site> sites;
        for (std::size_t i = 0; i < p.rows(); ++i) sites.push_back({{p(i, 0), p(i, 1)}, v[i]});
        const auto t = voronoi(sites, {bbox[0], bbox[1], bbox[2], bbox[3]});
        py::list cells;
        for (const auto& c : t.cells) {
          Matrix ring(c.polygon.size(), 2);
          for (std::size_t i = 0; i < c.polygon.size(); ++i) ring(i, 0) = c.polygon[i].x, ring(i, 1) = c.polygon[i].y;
          py::dict d;
          d["site"] = py::make_tuple(c.site.p.x, c.site.p.y);
          d["value"] = c.site.value;
          d["polygon"] = to_array(ring);
          d["area"] = polygon_area(c.polygon);
          cells.append(d);
        }
        return cells;
      },
      py::arg("points"), py::arg("values"), py::arg("bbox"),
      "Clipped Voronoi cells; bbox is (min_x, min_y, max_x, max_y) in meters.");

  // dbn
  py::class_<DbnModel>(m, "DbnModel")
      .def_property_readonly("layer_sizes", [](const DbnModel& d) { return d.layer_sizes; })
      .def_property_readonly("training_error", [](const DbnModel& d) { return d.training_error; })
      .def("features", [](const DbnModel& d, const Array& x) { return to_array(extract_features(d, to_matrix(x))); })
      .def("to_json", [](const DbnModel& d) { return dbn_to_json(d); })
      .def_static("from_json", [](const std::string& s) { return dbn_from_json(s); });
  m.def(
      "train_dbn",
      [](const Array& data, std::vector<std::size_t> hidden, double learning_rate, std::size_t epochs,
         std::size_t batch_size, std::uint64_t seed) {
        const auto x = to_matrix(data);
        TrainConfig cfg{.learning_rate = learning_rate, .epochs = epochs, .batch_size = batch_size, .seed = seed};
        auto sizes = default_layer_sizes(x.cols());
        if (!hidden.empty()) {
          sizes = {x.cols()};
          sizes.insert(sizes.end(), hidden.begin(), hidden.end());
        }
        return train_dbn(x, cfg, sizes);
      },
      py::arg("data"), py::arg("hidden") = std::vector<std::size_t>{}, py::arg("learning_rate") = 0.1,
      py::arg("epochs") = 20, py::arg("batch_size") = 128, py::arg("seed") = 0);

  // classify
  m.def(
      "kfold_cv",
      [](const Array& x, std::vector<int> y, const std::string& model, std::size_t folds, std::uint64_t seed) {
        LabeledDataset d;
        d.x = to_matrix(x);
        d.y = std::move(y);
        if (d.x.rows() != d.y.size()) throw py::value_error("x and y row counts differ");
        return eval_dict(kfold_cv(model_kind(model), d, folds, seed));
      },
      py::arg("x"), py::arg("y"), py::arg("model") = "random_forest", py::arg("folds") = 10, py::arg("seed") = 0,
      "Cross-validated accuracy; labels are valence 1..5.");

  // pipeline
  m.def(
      "run_pipeline_json",
      [](const std::string& config_json) {
        const auto cfg = pipeline_config_from_json(config_json);
        py::gil_scoped_release release;
        return run_report_json(run_pipeline(cfg));
      },
      py::arg("config_json"), "Run the staged pipeline; returns the run report as JSON.");
  m.def("default_config_json", [] { return pipeline_config_to_json(PipelineConfig{}); });
  m.def("pipeline_stages", &pipeline_stages);
}
