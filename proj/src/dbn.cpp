#include "exposome/dbn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "exposome/error.hpp"
#include "exposome/seed.hpp"

namespace exposome {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

RbmLayer RbmLayer::random(std::size_t visible, std::size_t hidden, double init_sd, std::mt19937_64& rng) {
  RbmLayer layer = zeros(visible, hidden);
  std::normal_distribution<double> normal(0.0, init_sd);
  for (auto& w : layer.weights.data()) w = normal(rng);
  return layer;
}

RbmLayer RbmLayer::zeros(std::size_t visible, std::size_t hidden) {
  return {Matrix(visible, hidden), std::vector<double>(visible, 0.0), std::vector<double>(hidden, 0.0)};
}

RbmLayer RbmLayer::transposed() const { return {weights.transpose(), hidden_bias, visible_bias}; }

std::vector<double> hidden_probs(const RbmLayer& layer, std::span<const double> visible) {
  if (visible.size() != layer.visible_size())
    throw Error(ErrorKind::DimensionMismatch, "visible vector has " + std::to_string(visible.size()) +
                                                  " entries, layer expects " + std::to_string(layer.visible_size()));
  std::vector<double> act(layer.hidden_bias);
  for (std::size_t i = 0; i < visible.size(); ++i) {
    const double v = visible[i];
    if (v == 0.0) continue;
    auto w = layer.weights.row(i);
    for (std::size_t j = 0; j < act.size(); ++j) act[j] += w[j] * v;
  }
  for (auto& a : act) a = logistic(a);
  return act;
}

std::vector<double> visible_probs(const RbmLayer& layer, std::span<const double> hidden) {
  if (hidden.size() != layer.hidden_size())
    throw Error(ErrorKind::DimensionMismatch, "hidden vector has " + std::to_string(hidden.size()) +
                                                  " entries, layer expects " + std::to_string(layer.hidden_size()));
  std::vector<double> act(layer.visible_bias);
  for (std::size_t i = 0; i < act.size(); ++i) {
    auto w = layer.weights.row(i);
    double s = act[i];
    for (std::size_t j = 0; j < hidden.size(); ++j) s += w[j] * hidden[j];
    act[i] = logistic(s);
  }
  return act;
}

Matrix hidden_probs(const RbmLayer& layer, const Matrix& visible) {
  if (visible.cols() != layer.visible_size())
    throw Error(ErrorKind::DimensionMismatch, "batch width does not match visible layer");
  Matrix out(visible.rows(), layer.hidden_size());
  for (std::size_t r = 0; r < visible.rows(); ++r) {
    const auto h = hidden_probs(layer, visible.row(r));
    std::copy(h.begin(), h.end(), out.row(r).begin());
  }
  return out;
}

double free_energy(const RbmLayer& layer, std::span<const double> visible) {
  if (visible.size() != layer.visible_size()) throw Error(ErrorKind::DimensionMismatch, "visible size");
  double energy = 0.0;
  for (std::size_t i = 0; i < visible.size(); ++i) energy -= layer.visible_bias[i] * visible[i];
  for (std::size_t j = 0; j < layer.hidden_size(); ++j) {
    double x = layer.hidden_bias[j];
    for (std::size_t i = 0; i < visible.size(); ++i) x += visible[i] * layer.weights(i, j);
    // log(1 + e^x) without overflow.
    energy -= x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return energy;
}

Cd1Result cd1_step(const RbmLayer& layer, const Matrix& batch, double learning_rate, std::mt19937_64& rng,
                   bool mean_field) {
  if (batch.rows() == 0) throw Error(ErrorKind::EmptyBatch, "cd1_step on an empty batch");
  if (batch.cols() != layer.visible_size())
    throw Error(ErrorKind::DimensionMismatch, "batch width does not match visible layer");

  const std::size_t m = layer.visible_size();
  const std::size_t n = layer.hidden_size();
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  Matrix dw(m, n);
  std::vector<double> da(m, 0.0);
  std::vector<double> db(n, 0.0);
  double squared_error = 0.0;
  std::vector<double> h0(n);

  for (std::size_t r = 0; r < batch.rows(); ++r) {
    const auto v0 = batch.row(r);
    const auto p0 = hidden_probs(layer, v0);
    for (std::size_t j = 0; j < n; ++j) h0[j] = uniform(rng) < p0[j] ? 1.0 : 0.0;
    auto v1 = visible_probs(layer, h0);
    if (!mean_field)
      for (auto& v : v1) v = uniform(rng) < v ? 1.0 : 0.0;
    auto h1 = hidden_probs(layer, v1);
    if (!mean_field)
      for (auto& h : h1) h = uniform(rng) < h ? 1.0 : 0.0;

    for (std::size_t i = 0; i < m; ++i) {
      auto row = dw.row(i);
      for (std::size_t j = 0; j < n; ++j) row[j] += v0[i] * h0[j] - v1[i] * h1[j];
      da[i] += v0[i] - v1[i];
      squared_error += (v0[i] - v1[i]) * (v0[i] - v1[i]);
    }
    for (std::size_t j = 0; j < n; ++j) db[j] += h0[j] - h1[j];
  }

  const double scale = learning_rate / static_cast<double>(batch.rows());
  Cd1Result out{layer, squared_error / static_cast<double>(batch.rows() * m)};
  if (learning_rate == 0.0) return out;
  for (std::size_t k = 0; k < dw.data().size(); ++k) out.layer.weights.data()[k] += scale * dw.data()[k];
  for (std::size_t i = 0; i < m; ++i) out.layer.visible_bias[i] += scale * da[i];
  for (std::size_t j = 0; j < n; ++j) out.layer.hidden_bias[j] += scale * db[j];
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::size_t> default_layer_sizes(std::size_t input) {
  return {input, (2 * input + 2) / 3, (input + 2) / 3};
}

DbnModel train_dbn(const Matrix& data, const TrainConfig& cfg, const std::vector<std::size_t>& sizes) {
  if (sizes.size() < 2) throw Error(ErrorKind::InvalidSizes, "need an input size and at least one hidden layer");
  if (std::any_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 0; }))
    throw Error(ErrorKind::InvalidSizes, "layer widths must be >= 1");
  if (data.rows() == 0) throw Error(ErrorKind::EmptyData, "no training rows");
  if (data.cols() != sizes.front())
    throw Error(ErrorKind::InvalidSizes, "input width " + std::to_string(data.cols()) + " != sizes[0] " +
                                             std::to_string(sizes.front()));
  if (cfg.epochs < 1 || cfg.batch_size < 1 || !(cfg.learning_rate > 0.0))
    throw Error(ErrorKind::InvalidSizes, "train config needs epochs >= 1, batch_size >= 1, learning_rate > 0");
  for (double v : data.data())
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorKind::EmptyData, "training data must lie in [0, 1] with no gaps");

  DbnModel model;
  model.layer_sizes = sizes;
  model.config = cfg;

  Matrix input = data;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    std::mt19937_64 rng(derive_seed(cfg.seed, k));
    RbmLayer layer = RbmLayer::random(sizes[k], sizes[k + 1], cfg.init_sd, rng);
    std::vector<std::size_t> order(input.rows());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> errors;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double total = 0.0;
      std::size_t batches = 0;
      for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
        const auto end = std::min(order.size(), start + cfg.batch_size);
        const Matrix batch = input.take_rows(std::span(order).subspan(start, end - start));
        auto step = cd1_step(layer, batch, cfg.learning_rate, rng, cfg.mean_field_reconstruction);
        layer = std::move(step.layer);
        total += step.reconstruction_error;
        ++batches;
      }
      errors.push_back(total / static_cast<double>(batches));
    }
    input = hidden_probs(layer, input);
    model.layers.push_back(std::move(layer));
    model.training_error.push_back(std::move(errors));
  }
  return model;
}

Matrix extract_features(const DbnModel& model, const Matrix& data) {
  if (data.cols() != model.input_size())
    throw Error(ErrorKind::DimensionMismatch, "data has " + std::to_string(data.cols()) + " columns, model expects " +
                                                  std::to_string(model.input_size()));
  Matrix out = data;
  for (const auto& layer : model.layers) out = hidden_probs(layer, out);
  return out;
}

// ---------------------------------------------------------------------------

namespace {
constexpr const char* kFormat = "exposome.dbn";
constexpr int kVersion = 1;
}  // namespace

std::string dbn_to_json(const DbnModel& model) {
  nlohmann::ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["layer_sizes"] = model.layer_sizes;
  j["config"] = {{"learning_rate", model.config.learning_rate},
                 {"epochs", model.config.epochs},
                 {"batch_size", model.config.batch_size},
                 {"seed", model.config.seed},
                 {"mean_field_reconstruction", model.config.mean_field_reconstruction},
                 {"init_sd", model.config.init_sd}};
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& layer : model.layers) {
    j["layers"].push_back({{"visible", layer.visible_size()},
                           {"hidden", layer.hidden_size()},
                           {"weights", layer.weights.data()},
                           {"visible_bias", layer.visible_bias},
                           {"hidden_bias", layer.hidden_bias}});
  }
  j["training_error"] = model.training_error;
  return j.dump(2) + "\n";
}

DbnModel dbn_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != kFormat || j.at("version").get<int>() != kVersion)
      throw Error(ErrorKind::InvalidConfig, "unsupported model format/version");
    DbnModel model;
    model.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    const auto& c = j.at("config");
    model.config.learning_rate = c.at("learning_rate").get<double>();
    model.config.epochs = c.at("epochs").get<std::size_t>();
    model.config.batch_size = c.at("batch_size").get<std::size_t>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.config.mean_field_reconstruction = c.value("mean_field_reconstruction", true);
    model.config.init_sd = c.value("init_sd", 0.01);
    for (const auto& l : j.at("layers")) {
      const auto m = l.at("visible").get<std::size_t>();
      const auto n = l.at("hidden").get<std::size_t>();
      RbmLayer layer = RbmLayer::zeros(m, n);
      layer.weights.data() = l.at("weights").get<std::vector<double>>();
      layer.visible_bias = l.at("visible_bias").get<std::vector<double>>();
      layer.hidden_bias = l.at("hidden_bias").get<std::vector<double>>();
      if (layer.weights.data().size() != m * n || layer.visible_bias.size() != m || layer.hidden_bias.size() != n)
        throw Error(ErrorKind::DimensionMismatch, "layer arrays do not match declared sizes");
      model.layers.push_back(std::move(layer));
    }
    if (model.layers.size() + 1 != model.layer_sizes.size())
      throw Error(ErrorKind::InvalidSizes, "layer count does not match layer_sizes");
    for (std::size_t k = 0; k < model.layers.size(); ++k)
      if (model.layers[k].visible_size() != model.layer_sizes[k] ||
          model.layers[k].hidden_size() != model.layer_sizes[k + 1])
        throw Error(ErrorKind::InvalidSizes, "layer shapes do not chain");
    if (j.contains("training_error"))
      model.training_error = j["training_error"].get<std::vector<std::vector<double>>>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("model JSON: ") + e.what());
  }
}

}  // namespace exposome
