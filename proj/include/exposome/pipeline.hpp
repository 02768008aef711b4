#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "exposome/align.hpp"
#include "exposome/classify.hpp"
#include "exposome/dbn.hpp"
#include "exposome/ingest.hpp"
#include "exposome/spatial.hpp"
#include "exposome/stats.hpp"

namespace exposome {

/// Synthetic scenario presets for runs without a manifest.
enum class SynthPreset {
  Coupled,          // pollution -> physiology -> label
  PollutionDriven,  // labels follow pollution; physiology weakly coupled
};

SynthConfig synth_preset(SynthPreset preset);
/// "coupled" | "pollution_driven". Throws ConfigError.
SynthPreset synth_preset_from_string(std::string_view name);

struct PipelineConfig {
  std::optional<std::filesystem::path> manifest;  // absent: synthesize
  SynthPreset synth = SynthPreset::Coupled;
  std::uint64_t seed = 7;

  // Empty channel lists mean "every fused channel" (correlation, PCA) or
  // "every environment channel" (regression predictors).
  std::vector<std::string> correlation_channels;
  std::vector<std::string> pca_channels;
  std::vector<std::string> regression_responses{"EDA", "HR"};
  std::vector<std::string> regression_predictors;

  std::vector<std::string> heatmap_channels{"PM2.5", "EDA"};
  double heatmap_cell_m = 25.0;
  std::string voronoi_value = "label";  // channel name or "label"
  std::vector<double> voronoi_bins{1.5, 2.5, 3.5, 4.5};
  double bbox_padding_m = 50.0;

  // 20 epochs of batch 128 leave a 0.1-rate DBN near its initialization on
  // ~1500 rows; 2.0 lets the features separate the classes.
  TrainConfig dbn{.learning_rate = 2.0};
  std::vector<std::size_t> dbn_hidden;  // empty: default widths
  std::vector<ModelKind::Type> classifiers{ModelKind::Type::RandomForest, ModelKind::Type::DecisionTree,
                                           ModelKind::Type::GaussianNb, ModelKind::Type::LogisticRegression};
  double window_s = 10.0;
  double stride_s = 10.0;
  std::size_t folds = 10;
  bool ablation = true;
  ModelKind::Type ablation_model = ModelKind::Type::RandomForest;

  std::filesystem::path out_dir = "exposome_out";
  /// Last stage to run ("ingest" .. "evaluate"); empty runs everything.
  std::string stop_after;
};

/// Stage names in execution order.
const std::vector<std::string>& pipeline_stages();

/// Parses a JSON config over the defaults. Throws ConfigError.
PipelineConfig pipeline_config_from_json(std::string_view json);
std::string pipeline_config_to_json(const PipelineConfig& cfg);

struct StageStatus {
  std::string name;
  bool ok = false;
  std::string error;  // "<ErrorKind>: message" on failure
  double seconds = 0.0;
};

struct OutputFile {
  std::string path;  // relative to out_dir
  std::string fnv1a64;
};

struct RunReport {
  std::vector<StageStatus> stages;
  std::vector<OutputFile> outputs;
  std::string config_echo;

  bool success() const;
  const StageStatus* failed_stage() const;
};

/// Everything the stages produced; members stay empty past a failure.
struct PipelineResults {
  std::optional<SessionBundle> bundle;
  std::optional<ValidationReport> validation;
  std::optional<FusedFrameTable> table;
  std::optional<CorrelationMatrix> correlation;
  std::optional<PcaResult> pca;
  std::vector<RegressionResult> regressions;
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> qq;
  std::vector<std::pair<std::string, HeatGrid>> heatmaps;
  std::optional<Tessellation> tessellation;
  std::optional<DbnModel> dbn;
  std::vector<EvalReport> evaluations;
  std::vector<EvalReport> ablation;
};

/// Stage order: ingest, validate, fuse, stats, spatial, train, evaluate.
/// Stops at the first failing stage; always writes the report bundle.
RunReport run_pipeline(const PipelineConfig& cfg);

/// Same, also returning the in-memory stage outputs.
RunReport run_pipeline(const PipelineConfig& cfg, PipelineResults& results);

/// Writes every available artifact plus `run_report.json`, `summary.txt`
/// and `timings.txt` into cfg.out_dir, filling report.outputs.
/// Throws IoError.
void emit_report(RunReport& report, const PipelineResults& results, const PipelineConfig& cfg);

std::string run_report_json(const RunReport& report);

}  // namespace exposome
