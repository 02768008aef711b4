#include "exposome/classify.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <numbers>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "exposome/error.hpp"
#include "exposome/seed.hpp"
#include "text_io.hpp"

namespace exposome {

std::string_view to_string(FeatureSource s) {
  switch (s) {
    case FeatureSource::RawFused: return "raw_fused";
    case FeatureSource::DbnFeatures: return "dbn_features";
    case FeatureSource::StatisticalFeatures: return "statistical_features";
  }
  return "raw_fused";
}

std::string_view to_string(Modality m) {
  switch (m) {
    case Modality::All: return "all";
    case Modality::Pollution: return "pollution";
    case Modality::Physiological: return "physiological";
  }
  return "all";
}

std::string_view to_string(ModelKind::Type t) {
  switch (t) {
    case ModelKind::Type::LogisticRegression: return "logistic_regression";
    case ModelKind::Type::GaussianNb: return "gaussian_nb";
    case ModelKind::Type::DecisionTree: return "decision_tree";
    case ModelKind::Type::RandomForest: return "random_forest";
  }
  return "random_forest";
}

ModelKind::Type model_type_from_string(std::string_view name) {
  if (name == "logistic_regression") return ModelKind::Type::LogisticRegression;
  if (name == "gaussian_nb") return ModelKind::Type::GaussianNb;
  if (name == "decision_tree") return ModelKind::Type::DecisionTree;
  if (name == "random_forest") return ModelKind::Type::RandomForest;
  throw Error(ErrorKind::ConfigError, "unknown classifier '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

std::vector<std::string> modality_channels(const FusedFrameTable& table, Modality modality) {
  switch (modality) {
    case Modality::Pollution: return table.channel_names(ChannelKind::Environment);
    case Modality::Physiological: return table.channel_names(ChannelKind::Physiology);
    case Modality::All: break;
  }
  return table.channel_names();
}

LabeledDataset raw_dataset(const FusedFrameTable& table, const std::vector<std::string>& channels, Modality modality) {
  std::vector<std::size_t> cols;
  for (const auto& name : channels) cols.push_back(table.require_index(name));
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (!table.labels[r]) continue;
    bool complete = true;
    for (auto c : cols) complete = complete && !is_missing(table.values(r, c));
    if (complete) rows.push_back(r);
  }
  if (rows.empty()) throw Error(ErrorKind::NoLabeledRows, "no labeled rows with complete channels");
  LabeledDataset d;
  d.x = table.values.take_rows(rows).take_cols(cols);
  for (auto r : rows) d.y.push_back(*table.labels[r]);
  d.feature_names = channels;
  d.provenance = FeatureSource::RawFused;
  d.modality = modality;
  return d;
}

LabeledDataset dbn_dataset(const DbnModel& model, const LabeledDataset& raw) {
  LabeledDataset d;
  d.x = extract_features(model, raw.x);
  d.y = raw.y;
  for (std::size_t j = 0; j < d.x.cols(); ++j) d.feature_names.push_back("dbn_" + std::to_string(j));
  d.provenance = FeatureSource::DbnFeatures;
  d.modality = raw.modality;
  return d;
}

double quantile_type7(std::vector<double> values, double q) {
  if (values.empty()) return kMissing;
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(values.size() - 1, lo + 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

LabeledDataset statistical_features(const FusedFrameTable& table, double window_s, double stride_s,
                                    const std::vector<std::string>& channels_in, Modality modality) {
  if (!(window_s >= 2.0) || !(stride_s >= 1.0))
    throw Error(ErrorKind::InvalidConfig, "window must be >= 2 s and stride >= 1 s");
  const auto channels = channels_in.empty() ? table.channel_names() : channels_in;
  std::vector<std::size_t> cols;
  for (const auto& name : channels) cols.push_back(table.require_index(name));

  LabeledDataset d;
  d.provenance = FeatureSource::StatisticalFeatures;
  d.modality = modality;
  static constexpr const char* kStats[] = {"mean", "median", "max", "min", "range", "sd", "q1", "q3"};
  for (const auto& name : channels)
    for (const char* s : kStats) d.feature_names.push_back(name + "_" + s);

  std::vector<std::vector<double>> rows;
  if (table.rows() > 0) {
    const double first = static_cast<double>(table.times_s.front());
    const double last = static_cast<double>(table.times_s.back());
    std::size_t cursor = 0;
    for (double start = first; start + window_s <= last + 1.0; start += stride_s) {
      while (cursor < table.rows() && static_cast<double>(table.times_s[cursor]) < start) ++cursor;
      std::size_t end = cursor;
      while (end < table.rows() && static_cast<double>(table.times_s[end]) < start + window_s) ++end;

      std::array<std::size_t, kNumValence + 1> votes{};
      for (std::size_t r = cursor; r < end; ++r)
        if (table.labels[r]) ++votes[static_cast<std::size_t>(*table.labels[r])];
      std::size_t best = 0;
      for (std::size_t v = 1; v <= kNumValence; ++v)
        if (votes[v] > votes[best]) best = v;
      if (best == 0) continue;

      std::vector<double> features;
      bool complete = true;
      for (auto c : cols) {
        std::vector<double> w;
        for (std::size_t r = cursor; r < end; ++r)
          if (!is_missing(table.values(r, c))) w.push_back(table.values(r, c));
        if (w.empty()) {
          complete = false;
          break;
        }
        const double n = static_cast<double>(w.size());
        const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : w) ss += (v - mean) * (v - mean);
        const auto [mn, mx] = std::minmax_element(w.begin(), w.end());
        const double lo = *mn, hi = *mx;
        features.insert(features.end(), {mean, quantile_type7(w, 0.5), hi, lo, hi - lo, std::sqrt(ss / n),
                                         quantile_type7(w, 0.25), quantile_type7(w, 0.75)});
      }
      if (!complete) continue;
      rows.push_back(std::move(features));
      d.y.push_back(static_cast<int>(best));
    }
  }
  if (rows.empty()) throw Error(ErrorKind::NoLabeledRows, "no labeled window");
  d.x = Matrix::from_rows(rows);
  return d;
}

// ---------------------------------------------------------------------------

namespace {

struct Encoded {
  std::vector<int> classes;          // ascending valence
  std::vector<std::size_t> targets;  // per row, index into classes
};

Encoded encode_labels(std::span<const int> y) {
  Encoded e;
  e.classes.assign(y.begin(), y.end());
  std::sort(e.classes.begin(), e.classes.end());
  e.classes.erase(std::unique(e.classes.begin(), e.classes.end()), e.classes.end());
  for (int v : y)
    e.targets.push_back(
        static_cast<std::size_t>(std::lower_bound(e.classes.begin(), e.classes.end(), v) - e.classes.begin()));
  return e;
}

std::size_t argmax_lowest(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

void softmax_logits(const Matrix& w, std::span<const double> row, std::vector<double>& out) {
  const std::size_t p = row.size();
  out.resize(w.rows());
  for (std::size_t k = 0; k < w.rows(); ++k) {
    auto wk = w.row(k);
    double z = wk[p];
    for (std::size_t j = 0; j < p; ++j) z += wk[j] * row[j];
    out[k] = z;
  }
}

}  // namespace

double logistic_loss_and_gradient(const Matrix& weights, const Matrix& x, std::span<const std::size_t> targets,
                                  Matrix* gradient) {
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  const std::size_t k = weights.rows();
  if (weights.cols() != p + 1 || targets.size() != n)
    throw Error(ErrorKind::DimensionMismatch, "logistic weights/targets shape");
  if (gradient) *gradient = Matrix(k, p + 1);
  double loss = 0.0;
  std::vector<double> z;
  for (std::size_t r = 0; r < n; ++r) {
    const auto row = x.row(r);
    softmax_logits(weights, row, z);
    const double zmax = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - zmax);
    const double log_norm = zmax + std::log(sum);
    loss -= z[targets[r]] - log_norm;
    if (!gradient) continue;
    for (std::size_t c = 0; c < k; ++c) {
      const double delta = std::exp(z[c] - log_norm) - (c == targets[r] ? 1.0 : 0.0);
      auto g = gradient->row(c);
      for (std::size_t j = 0; j < p; ++j) g[j] += delta * row[j];
      g[p] += delta;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  if (gradient)
    for (auto& g : gradient->data()) g *= inv_n;
  return loss * inv_n;
}

std::vector<double> gaussian_nb_posterior(const GaussianNbModel& model, std::span<const double> row) {
  const std::size_t k = model.log_priors.size();
  std::vector<double> log_post(k);
  for (std::size_t c = 0; c < k; ++c) {
    double s = model.log_priors[c];
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double var = model.variances(c, j);
      const double d = row[j] - model.means(c, j);
      s -= 0.5 * std::log(2.0 * std::numbers::pi * var) + d * d / (2.0 * var);
    }
    log_post[c] = s;
  }
  const double mx = *std::max_element(log_post.begin(), log_post.end());
  double sum = 0.0;
  for (auto& v : log_post) sum += (v = std::exp(v - mx));
  for (auto& v : log_post) v /= sum;
  return log_post;
}

std::size_t DecisionTreeModel::predict_index(std::span<const double> row) const {
  std::size_t node = 0;
  while (!nodes[node].leaf) node = row[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left : nodes[node].right;
  return nodes[node].class_index;
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const std::size_t> targets, std::size_t classes, const ModelKind& kind,
              std::size_t features_per_split, std::mt19937_64* rng)
      : x_(x), targets_(targets), classes_(classes), kind_(kind), per_split_(features_per_split), rng_(rng) {}

  DecisionTreeModel build(std::vector<std::size_t> indices) {
    DecisionTreeModel tree;
    tree.nodes.emplace_back();
    grow(tree, 0, std::move(indices), 0);
    return tree;
  }

 private:
  struct Split {
    double impurity = std::numeric_limits<double>::infinity();
    std::size_t feature = 0;
    double threshold = 0.0;
  };

  std::vector<std::size_t> counts_of(const std::vector<std::size_t>& idx) const {
    std::vector<std::size_t> counts(classes_, 0);
    for (auto i : idx) ++counts[targets_[i]];
    return counts;
  }

  static double gini(const std::vector<std::size_t>& counts, std::size_t n) {
    if (n == 0) return 0.0;
    double s = 1.0;
    for (auto c : counts) {
      const double f = static_cast<double>(c) / static_cast<double>(n);
      s -= f * f;
    }
    return s;
  }

  // Best threshold on one feature; returns false if the feature is constant
  // over the node.
  bool scan_feature(const std::vector<std::size_t>& idx, std::size_t f, Split& best) const {
    std::vector<std::pair<double, std::size_t>> vals;
    vals.reserve(idx.size());
    for (auto i : idx) vals.emplace_back(x_(i, f), targets_[i]);
    std::sort(vals.begin(), vals.end());
    if (vals.front().first == vals.back().first) return false;

    std::vector<std::size_t> left(classes_, 0);
    std::vector<std::size_t> right(classes_, 0);
    for (const auto& v : vals) ++right[v.second];
    const std::size_t n = vals.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[vals[i].second];
      --right[vals[i].second];
      if (vals[i].first == vals[i + 1].first) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      const double impurity = (static_cast<double>(nl) * gini(left, nl) + static_cast<double>(nr) * gini(right, nr)) /
                              static_cast<double>(n);
      if (impurity < best.impurity) {
        double mid = 0.5 * (vals[i].first + vals[i + 1].first);
        if (!(mid < vals[i + 1].first)) mid = vals[i].first;
        best = {impurity, f, mid};
      }
    }
    return true;
  }

  void grow(DecisionTreeModel& tree, std::size_t node, std::vector<std::size_t> idx, std::size_t depth) {
    const auto counts = counts_of(idx);
    std::size_t majority = 0;
    for (std::size_t c = 1; c < classes_; ++c)
      if (counts[c] > counts[majority]) majority = c;
    tree.nodes[node].class_index = majority;
    tree.nodes[node].leaf = true;

    const bool pure = counts[majority] == idx.size();
    if (pure || depth >= kind_.max_depth || idx.size() < kind_.min_samples_split) return;

    const std::size_t p = x_.cols();
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    if (rng_) std::shuffle(order.begin(), order.end(), *rng_);
    Split best;
    std::size_t informative = 0;
    for (auto f : order) {
      if (informative >= per_split_) break;
      if (scan_feature(idx, f, best)) ++informative;
    }
    if (!std::isfinite(best.impurity)) return;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (x_(i, best.feature) <= best.threshold ? left : right).push_back(i);
    if (left.empty() || right.empty()) return;

    const std::size_t l = tree.nodes.size();
    tree.nodes.emplace_back();
    const std::size_t r = tree.nodes.size();
    tree.nodes.emplace_back();
    tree.nodes[node].leaf = false;
    tree.nodes[node].feature = best.feature;
    tree.nodes[node].threshold = best.threshold;
    tree.nodes[node].left = l;
    tree.nodes[node].right = r;
    idx.clear();
    idx.shrink_to_fit();
    grow(tree, l, std::move(left), depth + 1);
    grow(tree, r, std::move(right), depth + 1);
  }

  const Matrix& x_;
  std::span<const std::size_t> targets_;
  std::size_t classes_;
  const ModelKind& kind_;
  std::size_t per_split_;
  std::mt19937_64* rng_;
};

}  // namespace

Model train_model(const ModelKind& kind, const LabeledDataset& data, std::uint64_t seed) {
  if (data.rows() == 0 || data.x.rows() != data.rows()) throw Error(ErrorKind::EmptyDataset, "no training rows");
  const auto enc = encode_labels(data.y);
  if (enc.classes.size() < 2) throw Error(ErrorKind::SingleClass, "training data holds a single class");
  const std::size_t n = data.rows();
  const std::size_t p = data.x.cols();
  const std::size_t k = enc.classes.size();

  switch (kind.type) {
    case ModelKind::Type::LogisticRegression: {
      LogisticModel m{Matrix(k, p + 1), std::vector<double>(p, 0.0), std::vector<double>(p, 1.0)};
      for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0, ss = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += data.x(r, j);
        mean /= static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r) ss += (data.x(r, j) - mean) * (data.x(r, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        m.center[j] = mean;
        m.scale[j] = sd > 0.0 ? sd : 1.0;
      }
      Matrix z(n, p);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t j = 0; j < p; ++j) z(r, j) = (data.x(r, j) - m.center[j]) / m.scale[j];
      Matrix grad;
      for (std::size_t it = 0; it < kind.iterations; ++it) {
        logistic_loss_and_gradient(m.weights, z, enc.targets, &grad);
        for (std::size_t i = 0; i < grad.data().size(); ++i) m.weights.data()[i] -= kind.learning_rate * grad.data()[i];
      }
      return Model(kind, enc.classes, p, std::move(m));
    }
    case ModelKind::Type::GaussianNb: {
      GaussianNbModel m{std::vector<double>(k), Matrix(k, p), Matrix(k, p)};
      std::vector<double> count(k, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const auto c = enc.targets[r];
        count[c] += 1.0;
        for (std::size_t j = 0; j < p; ++j) m.means(c, j) += data.x(r, j);
      }
      for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < p; ++j) m.means(c, j) /= count[c];
      for (std::size_t r = 0; r < n; ++r) {
        const auto c = enc.targets[r];
        for (std::size_t j = 0; j < p; ++j) {
          const double d = data.x(r, j) - m.means(c, j);
          m.variances(c, j) += d * d;
        }
      }
      for (std::size_t c = 0; c < k; ++c) {
        m.log_priors[c] = std::log(count[c] / static_cast<double>(n));
        for (std::size_t j = 0; j < p; ++j)
          m.variances(c, j) = std::max(m.variances(c, j) / count[c], kind.variance_floor);
      }
      return Model(kind, enc.classes, p, std::move(m));
    }
    case ModelKind::Type::DecisionTree: {
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), 0);
      TreeBuilder builder(data.x, enc.targets, k, kind, p, nullptr);
      return Model(kind, enc.classes, p, builder.build(std::move(all)));
    }
    case ModelKind::Type::RandomForest: {
      RandomForestModel forest;
      const auto per_split = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));
      for (std::size_t t = 0; t < kind.n_trees; ++t) {
        std::mt19937_64 rng(derive_seed(seed, t));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = pick(rng);
        TreeBuilder builder(data.x, enc.targets, k, kind, per_split, &rng);
        forest.trees.push_back(builder.build(std::move(sample)));
      }
      return Model(kind, enc.classes, p, std::move(forest));
    }
  }
  throw Error(ErrorKind::ConfigError, "unknown model type");
}

std::vector<int> predict(const Model& model, const Matrix& x) {
  if (x.cols() != model.feature_count())
    throw Error(ErrorKind::DimensionMismatch, "model expects " + std::to_string(model.feature_count()) +
                                                  " features, got " + std::to_string(x.cols()));
  const auto& classes = model.classes();
  std::vector<int> out;
  out.reserve(x.rows());
  std::vector<double> scores;
  std::vector<double> standardized;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    const std::size_t idx = std::visit(
        [&](const auto& m) -> std::size_t {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, LogisticModel>) {
            standardized.resize(row.size());
            for (std::size_t j = 0; j < row.size(); ++j) standardized[j] = (row[j] - m.center[j]) / m.scale[j];
            softmax_logits(m.weights, standardized, scores);
            return argmax_lowest(scores);
          } else if constexpr (std::is_same_v<T, GaussianNbModel>) {
            return argmax_lowest(gaussian_nb_posterior(m, row));
          } else if constexpr (std::is_same_v<T, DecisionTreeModel>) {
            return m.predict_index(row);
          } else {
            scores.assign(classes.size(), 0.0);
            for (const auto& tree : m.trees) scores[tree.predict_index(row)] += 1.0;
            return argmax_lowest(scores);
          }
        },
        model.impl());
    out.push_back(classes[idx]);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::vector<std::size_t>> fold_assignment(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw Error(ErrorKind::InvalidConfig, "k-fold needs k >= 2");
  if (n < k) throw Error(ErrorKind::TooFewRows, std::to_string(n) + " rows for " + std::to_string(k) + " folds");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> folds(k);
  std::size_t pos = 0;
  for (std::size_t f = 0; f < k; ++f) {
    const std::size_t size = n / k + (f < n % k ? 1 : 0);
    folds[f].assign(order.begin() + static_cast<std::ptrdiff_t>(pos), order.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  return folds;
}

namespace {

struct FoldResult {
  double accuracy = 0.0;
  std::array<std::array<std::size_t, kNumValence>, kNumValence> confusion{};
};

FoldResult run_fold(const ModelKind& kind, const LabeledDataset& data, const std::vector<std::size_t>& test,
                    std::uint64_t seed) {
  std::vector<char> in_test(data.rows(), 0);
  for (auto i : test) in_test[i] = 1;
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < data.rows(); ++i)
    if (!in_test[i]) train.push_back(i);

  LabeledDataset train_set;
  train_set.x = data.x.take_rows(train);
  for (auto i : train) train_set.y.push_back(data.y[i]);
  const auto model = train_model(kind, train_set, seed);
  const auto predicted = predict(model, data.x.take_rows(test));

  FoldResult out;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const int truth = data.y[test[i]];
    correct += predicted[i] == truth;
    ++out.confusion[static_cast<std::size_t>(truth - 1)][static_cast<std::size_t>(predicted[i] - 1)];
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  return out;
}

}  // namespace

EvalReport kfold_cv(const ModelKind& kind, const LabeledDataset& data, std::size_t k, std::uint64_t seed) {
  const auto folds = fold_assignment(data.rows(), k, seed);
  std::vector<std::future<FoldResult>> jobs;
  for (std::size_t f = 0; f < k; ++f)
    jobs.push_back(std::async(std::launch::async, run_fold, std::cref(kind), std::cref(data), std::cref(folds[f]),
                              derive_seed(seed, f)));

  EvalReport report;
  report.model = kind.type;
  report.features = data.provenance;
  report.modality = data.modality;
  for (auto& job : jobs) {
    const auto fold = job.get();
    report.fold_accuracies.push_back(fold.accuracy);
    for (std::size_t i = 0; i < kNumValence; ++i)
      for (std::size_t j = 0; j < kNumValence; ++j) report.confusion[i][j] += fold.confusion[i][j];
  }
  const double kf = static_cast<double>(k);
  report.mean_accuracy = std::accumulate(report.fold_accuracies.begin(), report.fold_accuracies.end(), 0.0) / kf;
  double ss = 0.0;
  for (double a : report.fold_accuracies) ss += (a - report.mean_accuracy) * (a - report.mean_accuracy);
  report.std_accuracy = std::sqrt(ss / kf);
  return report;
}

std::array<EvalReport, 3> modality_ablation(const LabeledDataset& all, const LabeledDataset& pollution,
                                            const LabeledDataset& physiological, const ModelKind& kind,
                                            std::uint64_t seed, std::size_t k) {
  if (pollution.rows() != all.rows() || physiological.rows() != all.rows() || pollution.y != all.y ||
      physiological.y != all.y)
    throw Error(ErrorKind::RowMismatch, "modality datasets must share rows and labels");
  return {kfold_cv(kind, all, k, seed), kfold_cv(kind, pollution, k, seed), kfold_cv(kind, physiological, k, seed)};
}

std::string eval_report_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["model"] = to_string(r.model);
  j["features"] = to_string(r.features);
  j["modality"] = to_string(r.modality);
  j["fold_accuracies"] = r.fold_accuracies;
  j["mean_accuracy"] = r.mean_accuracy;
  j["std_accuracy"] = r.std_accuracy;
  j["confusion"] = r.confusion;
  return j.dump(2) + "\n";
}

std::string eval_summary_csv(std::span<const EvalReport> reports) {
  std::string out = "model,features,modality,mean_accuracy,std_accuracy\n";
  for (const auto& r : reports)
    out += std::string(to_string(r.model)) + ',' + std::string(to_string(r.features)) + ',' +
           std::string(to_string(r.modality)) + ',' + detail::format_double(r.mean_accuracy) + ',' +
           detail::format_double(r.std_accuracy) + '\n';
  return out;
}

}  // namespace exposome
