#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "exposome/align.hpp"
#include "exposome/dbn.hpp"
#include "exposome/matrix.hpp"

namespace exposome {

inline constexpr int kNumValence = 5;

enum class FeatureSource { RawFused, DbnFeatures, StatisticalFeatures };
enum class Modality { All, Pollution, Physiological };

std::string_view to_string(FeatureSource s);
std::string_view to_string(Modality m);

struct LabeledDataset {
  Matrix x;
  std::vector<int> y;  // valence 1..5
  std::vector<std::string> feature_names;
  FeatureSource provenance = FeatureSource::RawFused;
  Modality modality = Modality::All;

  std::size_t rows() const noexcept { return y.size(); }
};

/// Channels belonging to a modality: environment kinds for pollution,
/// physiology kinds for physiological, every channel for all.
std::vector<std::string> modality_channels(const FusedFrameTable& table, Modality modality);

/// Labeled rows with every selected channel present.
/// Throws NoLabeledRows.
LabeledDataset raw_dataset(const FusedFrameTable& table, const std::vector<std::string>& channels,
                           Modality modality = Modality::All);

/// Top-layer DBN features of a raw dataset.
LabeledDataset dbn_dataset(const DbnModel& model, const LabeledDataset& raw);

/// Per channel and window: mean, median, max, min, max-min, standard
/// deviation (population), Q1, Q3 (type-7 quantiles). The window label is
/// the majority valence among its labeled rows, ties to the lower valence.
/// Windows span [start, start + window) seconds, advancing by `stride`.
/// Throws InvalidConfig (window < 2 or stride < 1) / NoLabeledRows.
LabeledDataset statistical_features(const FusedFrameTable& table, double window_s = 10.0, double stride_s = 10.0,
                                    const std::vector<std::string>& channels = {},
                                    Modality modality = Modality::All);

/// Linear-interpolation quantile between order statistics (type 7).
double quantile_type7(std::vector<double> values, double q);

// --- models ---------------------------------------------------------------

struct ModelKind {
  enum class Type { LogisticRegression, GaussianNb, DecisionTree, RandomForest };
  Type type = Type::RandomForest;
  // logistic regression
  std::size_t iterations = 500;
  double learning_rate = 0.1;
  // trees
  std::size_t max_depth = 12;
  std::size_t min_samples_split = 2;
  std::size_t n_trees = 100;
  // gaussian naive Bayes
  double variance_floor = 1e-9;

  static ModelKind logistic_regression() { return {Type::LogisticRegression}; }
  static ModelKind gaussian_nb() { return {Type::GaussianNb}; }
  static ModelKind decision_tree() { return {Type::DecisionTree}; }
  static ModelKind random_forest() { return {Type::RandomForest}; }
};

std::string_view to_string(ModelKind::Type t);
ModelKind::Type model_type_from_string(std::string_view name);

/// Multinomial softmax regression; weights are classes x (features + 1)
/// with the bias in the last column. Inputs are z-scored with the training
/// means/standard deviations before the weights apply, so a fixed step size
/// works whatever the feature scales.
struct LogisticModel {
  Matrix weights;
  std::vector<double> center;
  std::vector<double> scale;
};

/// Mean cross-entropy of softmax(W [x;1]) and its gradient with respect to
/// W. `targets` are class indices into the rows of `weights`.
double logistic_loss_and_gradient(const Matrix& weights, const Matrix& x, std::span<const std::size_t> targets,
                                  Matrix* gradient);

struct GaussianNbModel {
  std::vector<double> log_priors;  // per class
  Matrix means;                    // classes x features
  Matrix variances;
};

/// Class posteriors (sum to 1) for one row.
std::vector<double> gaussian_nb_posterior(const GaussianNbModel& model, std::span<const double> row);

struct TreeNode {
  std::size_t feature = 0;
  double threshold = 0.0;  // go left when x[feature] <= threshold
  std::size_t left = 0;
  std::size_t right = 0;
  std::size_t class_index = 0;
  bool leaf = true;
};

struct DecisionTreeModel {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t predict_index(std::span<const double> row) const;
};

struct RandomForestModel {
  std::vector<DecisionTreeModel> trees;
};

class Model {
 public:
  using Impl = std::variant<LogisticModel, GaussianNbModel, DecisionTreeModel, RandomForestModel>;

  Model(ModelKind kind, std::vector<int> classes, std::size_t features, Impl impl)
      : kind_(kind), classes_(std::move(classes)), features_(features), impl_(std::move(impl)) {}

  const ModelKind& kind() const noexcept { return kind_; }
  /// Valence values, ascending; model-internal class i maps to classes()[i].
  const std::vector<int>& classes() const noexcept { return classes_; }
  std::size_t feature_count() const noexcept { return features_; }
  const Impl& impl() const noexcept { return impl_; }

 private:
  ModelKind kind_;
  std::vector<int> classes_;
  std::size_t features_;
  Impl impl_;
};

/// Throws SingleClass / EmptyDataset.
Model train_model(const ModelKind& kind, const LabeledDataset& data, std::uint64_t seed);

/// Throws DimensionMismatch.
std::vector<int> predict(const Model& model, const Matrix& x);

// --- evaluation -------------------------------------------------------------

struct EvalReport {
  ModelKind::Type model = ModelKind::Type::RandomForest;
  FeatureSource features = FeatureSource::RawFused;
  Modality modality = Modality::All;
  std::vector<double> fold_accuracies;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population standard deviation over folds
  std::array<std::array<std::size_t, kNumValence>, kNumValence> confusion{};  // [true - 1][predicted - 1]
};

/// Shuffled near-equal partition of 0..n-1 into k folds; a pure function
/// of (n, k, seed). Throws TooFewRows when n < k.
std::vector<std::vector<std::size_t>> fold_assignment(std::size_t n, std::size_t k, std::uint64_t seed);

/// Folds train concurrently; per-fold seeds derive from (seed, fold).
/// Throws TooFewRows.
EvalReport kfold_cv(const ModelKind& kind, const LabeledDataset& data, std::size_t k, std::uint64_t seed);

/// Cross-validates the same model on each modality with identical folds.
/// Returns {all, pollution, physiological}. Throws RowMismatch.
std::array<EvalReport, 3> modality_ablation(const LabeledDataset& all, const LabeledDataset& pollution,
                                             const LabeledDataset& physiological, const ModelKind& kind,
                                             std::uint64_t seed, std::size_t k = 10);

std::string eval_report_json(const EvalReport& r);
std::string eval_summary_csv(std::span<const EvalReport> reports);

}  // namespace exposome
