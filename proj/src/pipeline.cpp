#include "exposome/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "exposome/error.hpp"
#include "exposome/seed.hpp"
#include "text_io.hpp"

namespace exposome {

SynthConfig synth_preset(SynthPreset preset) {
  SynthConfig cfg = SynthConfig::defaults();
  if (preset == SynthPreset::PollutionDriven) {
    cfg.participant_id = "synthetic-pollution";
    for (auto& e : cfg.environment) {
      if (e.spec.name == "PM2.5") e.label_weight = -1.0;
      if (e.spec.name == "PM10") e.label_weight = -0.5;
      if (e.spec.name == "NH3") e.label_weight = -0.3;
    }
    for (auto& p : cfg.physiology) {
      for (auto& [name, w] : p.env_coupling) w *= 0.25;
      p.arousal_loading = 1.0;
      p.noise_sd *= 2.0;
      p.label_weight = 0.0;
    }
  }
  return cfg;
}

// ---------------------------------------------------------------------------

namespace {

std::string_view preset_name(SynthPreset p) { return p == SynthPreset::Coupled ? "coupled" : "pollution_driven"; }

}  // namespace

SynthPreset synth_preset_from_string(std::string_view name) {
  if (name == "coupled") return SynthPreset::Coupled;
  if (name == "pollution_driven") return SynthPreset::PollutionDriven;
  throw Error(ErrorKind::ConfigError, "unknown synth preset '" + std::string(name) + "'");
}

PipelineConfig pipeline_config_from_json(std::string_view text) {
  PipelineConfig cfg;
  try {
    const auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw Error(ErrorKind::ConfigError, "config must be a JSON object");
    if (j.contains("manifest") && !j["manifest"].is_null()) cfg.manifest = j["manifest"].get<std::string>();
    if (j.contains("synth")) cfg.synth = synth_preset_from_string(j["synth"].get<std::string>());
    cfg.seed = j.value("seed", cfg.seed);
    cfg.correlation_channels = j.value("correlation_channels", cfg.correlation_channels);
    cfg.pca_channels = j.value("pca_channels", cfg.pca_channels);
    cfg.regression_responses = j.value("regression_responses", cfg.regression_responses);
    cfg.regression_predictors = j.value("regression_predictors", cfg.regression_predictors);
    cfg.heatmap_channels = j.value("heatmap_channels", cfg.heatmap_channels);
    cfg.heatmap_cell_m = j.value("heatmap_cell_m", cfg.heatmap_cell_m);
    cfg.voronoi_value = j.value("voronoi_value", cfg.voronoi_value);
    cfg.voronoi_bins = j.value("voronoi_bins", cfg.voronoi_bins);
    cfg.bbox_padding_m = j.value("bbox_padding_m", cfg.bbox_padding_m);
    if (j.contains("dbn")) {
      const auto& d = j["dbn"];
      cfg.dbn.learning_rate = d.value("learning_rate", cfg.dbn.learning_rate);
      cfg.dbn.epochs = d.value("epochs", cfg.dbn.epochs);
      cfg.dbn.batch_size = d.value("batch_size", cfg.dbn.batch_size);
      cfg.dbn.mean_field_reconstruction = d.value("mean_field_reconstruction", cfg.dbn.mean_field_reconstruction);
      cfg.dbn.init_sd = d.value("init_sd", cfg.dbn.init_sd);
      cfg.dbn_hidden = d.value("hidden", cfg.dbn_hidden);
    }
    if (j.contains("classifiers")) {
      cfg.classifiers.clear();
      for (const auto& name : j["classifiers"]) cfg.classifiers.push_back(model_type_from_string(name.get<std::string>()));
    }
    cfg.window_s = j.value("window_s", cfg.window_s);
    cfg.stride_s = j.value("stride_s", cfg.stride_s);
    cfg.folds = j.value("folds", cfg.folds);
    cfg.ablation = j.value("ablation", cfg.ablation);
    if (j.contains("ablation_model")) cfg.ablation_model = model_type_from_string(j["ablation_model"].get<std::string>());
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    cfg.stop_after = j.value("stop_after", cfg.stop_after);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("config JSON: ") + e.what());
  }
  if (cfg.folds < 2) throw Error(ErrorKind::ConfigError, "folds must be >= 2");
  if (!(cfg.heatmap_cell_m > 0.0)) throw Error(ErrorKind::ConfigError, "heatmap_cell_m must be > 0");
  if (!cfg.stop_after.empty() && std::find(pipeline_stages().begin(), pipeline_stages().end(), cfg.stop_after) ==
                                     pipeline_stages().end())
    throw Error(ErrorKind::ConfigError, "unknown stage '" + cfg.stop_after + "'");
  if (!std::is_sorted(cfg.voronoi_bins.begin(), cfg.voronoi_bins.end()))
    throw Error(ErrorKind::ConfigError, "voronoi_bins must be ascending");
  return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["manifest"] = cfg.manifest ? nlohmann::ordered_json(cfg.manifest->generic_string()) : nlohmann::ordered_json(nullptr);
  j["synth"] = preset_name(cfg.synth);
  j["seed"] = cfg.seed;
  j["correlation_channels"] = cfg.correlation_channels;
  j["pca_channels"] = cfg.pca_channels;
  j["regression_responses"] = cfg.regression_responses;
  j["regression_predictors"] = cfg.regression_predictors;
  j["heatmap_channels"] = cfg.heatmap_channels;
  j["heatmap_cell_m"] = cfg.heatmap_cell_m;
  j["voronoi_value"] = cfg.voronoi_value;
  j["voronoi_bins"] = cfg.voronoi_bins;
  j["bbox_padding_m"] = cfg.bbox_padding_m;
  j["dbn"] = {{"learning_rate", cfg.dbn.learning_rate},
              {"epochs", cfg.dbn.epochs},
              {"batch_size", cfg.dbn.batch_size},
              {"mean_field_reconstruction", cfg.dbn.mean_field_reconstruction},
              {"init_sd", cfg.dbn.init_sd},
              {"hidden", cfg.dbn_hidden}};
  j["classifiers"] = nlohmann::ordered_json::array();
  for (auto t : cfg.classifiers) j["classifiers"].push_back(to_string(t));
  j["window_s"] = cfg.window_s;
  j["stride_s"] = cfg.stride_s;
  j["folds"] = cfg.folds;
  j["ablation"] = cfg.ablation;
  j["ablation_model"] = to_string(cfg.ablation_model);
  j["stop_after"] = cfg.stop_after;
  return j.dump(2) + "\n";
}

const std::vector<std::string>& pipeline_stages() {
  static const std::vector<std::string> names{"ingest", "validate", "fuse", "stats", "spatial", "train", "evaluate"};
  return names;
}

bool RunReport::success() const {
  return std::all_of(stages.begin(), stages.end(), [](const StageStatus& s) { return s.ok; });
}

const StageStatus* RunReport::failed_stage() const {
  for (const auto& s : stages)
    if (!s.ok) return &s;
  return nullptr;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> or_all(const std::vector<std::string>& chosen, std::vector<std::string> fallback) {
  return chosen.empty() ? fallback : chosen;
}

void require_channels(const FusedFrameTable& table, const PipelineConfig& cfg) {
  std::vector<std::string> wanted;
  for (const auto* list : {&cfg.correlation_channels, &cfg.pca_channels, &cfg.regression_responses,
                           &cfg.regression_predictors, &cfg.heatmap_channels})
    wanted.insert(wanted.end(), list->begin(), list->end());
  if (cfg.voronoi_value != "label") wanted.push_back(cfg.voronoi_value);
  for (const auto& name : wanted) {
    if (table.index_of(name)) continue;
    std::string msg = "channel '" + name + "' is not in the fused table";
    const auto& ex = table.excluded_channels;
    if (std::find(ex.begin(), ex.end(), name) != ex.end()) msg += " (excluded as constant)";
    throw Error(ErrorKind::ConfigError, msg);
  }
}

// Complete rows over every fused channel, labeled or not.
Matrix complete_matrix(const FusedFrameTable& table) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    const auto row = table.values.row(r);
    if (std::none_of(row.begin(), row.end(), [](double v) { return is_missing(v); })) rows.push_back(r);
  }
  return table.values.take_rows(rows);
}

}  // namespace

RunReport run_pipeline(const PipelineConfig& cfg) {
  PipelineResults results;
  return run_pipeline(cfg, results);
}

RunReport run_pipeline(const PipelineConfig& cfg, PipelineResults& res) {
  RunReport report;
  report.config_echo = pipeline_config_to_json(cfg);
  bool failed = false;
  bool done = false;

  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    if (failed || done) return;
    done = name == cfg.stop_after;
    StageStatus status{name, false, {}, 0.0};
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
      status.ok = true;
    } catch (const Error& e) {
      status.error = e.what();
    } catch (const std::exception& e) {
      status.error = std::string(to_string(ErrorKind::StageError)) + ": " + e.what();
    }
    status.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed = !status.ok;
    report.stages.push_back(std::move(status));
  };

  stage("ingest", [&] {
    if (cfg.manifest) {
      res.bundle = load_session(*cfg.manifest);
    } else {
      res.bundle = generate_synthetic_session(synth_preset(cfg.synth), derive_seed(cfg.seed, "synth")).bundle;
    }
  });

  stage("validate", [&] { res.validation = validate_bundle(*res.bundle); });

  stage("fuse", [&] {
    res.table = fuse(*res.bundle);
    require_channels(*res.table, cfg);
  });

  stage("stats", [&] {
    const auto& table = *res.table;
    res.correlation = pearson_matrix(table, or_all(cfg.correlation_channels, table.channel_names()));
    res.pca = pca(table, or_all(cfg.pca_channels, table.channel_names()));
    const auto predictors = or_all(cfg.regression_predictors, table.channel_names(ChannelKind::Environment));
    for (const auto& response : cfg.regression_responses) {
      res.regressions.push_back(ols_regress(table, response, predictors));
      res.qq.emplace_back(response, qq_data(res.regressions.back().residuals));
    }
  });

  stage("spatial", [&] {
    const auto& table = *res.table;
    const auto projection = LocalProjection::centered_on(table);
    const auto sites = sites_from_table(table, cfg.voronoi_value, projection);
    const auto bbox = bbox_around(sites, cfg.bbox_padding_m);
    res.tessellation = classify_cells(voronoi(sites, bbox, projection), cfg.voronoi_bins);
    for (const auto& ch : cfg.heatmap_channels) res.heatmaps.emplace_back(ch, grid_heatmap(table, ch, cfg.heatmap_cell_m));
  });

  stage("train", [&] {
    const Matrix data = complete_matrix(*res.table);
    TrainConfig tc = cfg.dbn;
    tc.seed = derive_seed(cfg.seed, "train");
    std::vector<std::size_t> sizes{data.cols()};
    if (cfg.dbn_hidden.empty()) {
      sizes = default_layer_sizes(data.cols());
    } else {
      sizes.insert(sizes.end(), cfg.dbn_hidden.begin(), cfg.dbn_hidden.end());
    }
    res.dbn = train_dbn(data, tc, sizes);
  });

  stage("evaluate", [&] {
    const auto& table = *res.table;
    const auto seed = derive_seed(cfg.seed, "evaluate");
    const auto raw = raw_dataset(table, table.channel_names());
    const auto dbn_features = dbn_dataset(*res.dbn, raw);
    const auto stat_features = statistical_features(table, cfg.window_s, cfg.stride_s);
    for (auto type : cfg.classifiers) {
      ModelKind kind;
      kind.type = type;
      res.evaluations.push_back(kfold_cv(kind, dbn_features, cfg.folds, seed));
      res.evaluations.push_back(kfold_cv(kind, stat_features, cfg.folds, seed));
    }
    if (cfg.ablation) {
      ModelKind kind;
      kind.type = cfg.ablation_model;
      auto subset = [&](Modality m) {
        const auto names = modality_channels(table, m);
        std::vector<std::size_t> cols;
        for (const auto& n : names)
          cols.push_back(static_cast<std::size_t>(std::find(raw.feature_names.begin(), raw.feature_names.end(), n) -
                                                  raw.feature_names.begin()));
        LabeledDataset d{raw.x.take_cols(cols), raw.y, names, FeatureSource::RawFused, m};
        return d;
      };
      const auto reports = modality_ablation(subset(Modality::All), subset(Modality::Pollution),
                                             subset(Modality::Physiological), kind, seed, cfg.folds);
      res.ablation.assign(reports.begin(), reports.end());
    }
  });

  emit_report(report, res, cfg);
  return report;
}

// ---------------------------------------------------------------------------

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string validation_json(const ValidationReport& v) {
  nlohmann::ordered_json j;
  j["channels"] = nlohmann::ordered_json::array();
  for (const auto& c : v.channels) {
    j["channels"].push_back({{"name", c.name},
                             {"sample_count", c.sample_count},
                             {"start_ms", c.start_ms ? nlohmann::ordered_json(*c.start_ms) : nlohmann::ordered_json()},
                             {"end_ms", c.end_ms ? nlohmann::ordered_json(*c.end_ms) : nlohmann::ordered_json()},
                             {"coverage_s", c.coverage_s},
                             {"constant", c.constant}});
  }
  j["overlap_ms"] = v.overlap_ms ? nlohmann::ordered_json({v.overlap_ms->first, v.overlap_ms->second})
                                 : nlohmann::ordered_json(nullptr);
  j["constant_channels"] = v.constant_channels();
  return j.dump(2) + "\n";
}

std::string safe_name(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

}  // namespace

std::string run_report_json(const RunReport& report) {
  nlohmann::ordered_json j;
  j["success"] = report.success();
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : report.stages)
    j["stages"].push_back({{"name", s.name}, {"ok", s.ok}, {"error", s.error}});
  j["outputs"] = nlohmann::ordered_json::array();
  for (const auto& o : report.outputs) j["outputs"].push_back({{"path", o.path}, {"fnv1a64", o.fnv1a64}});
  j["config"] = nlohmann::ordered_json::parse(report.config_echo);
  return j.dump(2) + "\n";
}

void emit_report(RunReport& report, const PipelineResults& res, const PipelineConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path& out = cfg.out_dir;
  try {
    fs::create_directories(out);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorKind::IoError, e.what());
  }
  report.outputs.clear();
  auto put = [&](const std::string& rel, const std::string& contents) {
    detail::write_file(out / rel, contents);
    report.outputs.push_back({rel, hex64(fnv1a(contents))});
  };

  if (res.bundle && !cfg.manifest) {
    const auto manifest = write_session(*res.bundle, out / "session");
    (void)manifest;
    for (const auto& entry : fs::directory_iterator(out / "session")) {
      if (!entry.is_regular_file()) continue;
      const auto rel = "session/" + entry.path().filename().string();
      report.outputs.push_back({rel, hex64(fnv1a(detail::read_file(entry.path())))});
    }
    std::sort(report.outputs.begin(), report.outputs.end(),
              [](const OutputFile& a, const OutputFile& b) { return a.path < b.path; });
  }
  if (res.validation) put("validation.json", validation_json(*res.validation));
  if (res.table) {
    put("fused.csv", serialize_fused_csv(*res.table));
    put("fused.meta.json", serialize_fused_meta(*res.table));
  }
  if (res.correlation) put("correlation.csv", correlation_csv(*res.correlation));
  if (res.pca) put("pca.json", pca_json(*res.pca));
  for (const auto& r : res.regressions) put("regression_" + safe_name(r.response) + ".csv", regression_csv(r));
  for (const auto& [name, points] : res.qq) put("qq_" + safe_name(name) + ".csv", qq_csv(points));
  for (const auto& [name, grid] : res.heatmaps) put("heatgrid_" + safe_name(name) + ".csv", heatgrid_csv(grid));
  if (res.tessellation) {
    put("voronoi.geojson", export_geojson(*res.tessellation));
    put("voronoi.svg", export_svg(*res.tessellation));
  }
  if (res.dbn) put("dbn_model.json", dbn_to_json(*res.dbn));
  for (const auto& e : res.evaluations)
    put("eval_" + std::string(to_string(e.model)) + "_" + std::string(to_string(e.features)) + ".json",
        eval_report_json(e));
  for (const auto& e : res.ablation) put("ablation_" + std::string(to_string(e.modality)) + ".json", eval_report_json(e));
  if (!res.evaluations.empty() || !res.ablation.empty()) {
    std::vector<EvalReport> all(res.evaluations);
    all.insert(all.end(), res.ablation.begin(), res.ablation.end());
    put("eval_summary.csv", eval_summary_csv(all));
  }

  std::ostringstream summary;
  summary << "exposome run: " << (report.success() ? "success" : "FAILED") << "\n";
  for (const auto& s : report.stages) summary << "  stage " << s.name << ": " << (s.ok ? "ok" : s.error) << "\n";
  if (res.table) {
    summary << "fused rows: " << res.table->rows() << ", channels: " << res.table->channels.size() << "\n";
    if (!res.table->excluded_channels.empty()) {
      summary << "excluded channels:";
      for (const auto& c : res.table->excluded_channels) summary << ' ' << c;
      summary << "\n";
    }
  }
  if (res.pca && res.pca->explained_ratio.size() >= 2)
    summary << "PCA explained ratio PC1 " << detail::format_double(res.pca->explained_ratio[0]) << ", PC2 "
            << detail::format_double(res.pca->explained_ratio[1]) << "\n";
  for (const auto& r : res.regressions)
    summary << "OLS " << r.response << ": R^2 " << detail::format_double(r.r_squared) << "\n";
  if (res.tessellation) summary << "voronoi cells: " << res.tessellation->cells.size() << "\n";
  for (const auto& e : res.evaluations)
    summary << "cv " << to_string(e.model) << " / " << to_string(e.features) << ": mean "
            << detail::format_double(e.mean_accuracy) << " sd " << detail::format_double(e.std_accuracy) << "\n";
  for (const auto& e : res.ablation)
    summary << "ablation " << to_string(e.modality) << ": mean " << detail::format_double(e.mean_accuracy) << "\n";
  put("summary.txt", summary.str());

  std::string timings = "stage,seconds\n";
  for (const auto& s : report.stages) timings += s.name + ',' + std::to_string(s.seconds) + '\n';
  detail::write_file(out / "timings.txt", timings);
  report.outputs.push_back({"timings.txt", ""});

  // The report lists itself last, without a hash.
  report.outputs.push_back({"run_report.json", ""});
  detail::write_file(out / "run_report.json", run_report_json(report));
}

}  // namespace exposome
