#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "exposome/matrix.hpp"

namespace exposome {

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 20;
  std::size_t batch_size = 128;
  std::uint64_t seed = 0;
  /// Reconstruct v1 and h1 with probabilities instead of samples; h0 is
  /// always sampled.
  bool mean_field_reconstruction = true;
  double init_sd = 0.01;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// One restricted Boltzmann machine: visible units x hidden units.
struct RbmLayer {
  Matrix weights;               // visible x hidden
  std::vector<double> visible_bias;
  std::vector<double> hidden_bias;

  std::size_t visible_size() const noexcept { return weights.rows(); }
  std::size_t hidden_size() const noexcept { return weights.cols(); }

  /// Gaussian N(0, init_sd) weights, zero biases.
  static RbmLayer random(std::size_t visible, std::size_t hidden, double init_sd, std::mt19937_64& rng);
  static RbmLayer zeros(std::size_t visible, std::size_t hidden);
  RbmLayer transposed() const;

  friend bool operator==(const RbmLayer&, const RbmLayer&) = default;
};

double logistic(double x);

/// P(h_j = 1 | v) = logistic(b_j + sum_i W_ij v_i). Throws DimensionMismatch.
std::vector<double> hidden_probs(const RbmLayer& layer, std::span<const double> visible);

/// P(v_i = 1 | h) = logistic(a_i + sum_j W_ij h_j). Throws DimensionMismatch.
std::vector<double> visible_probs(const RbmLayer& layer, std::span<const double> hidden);

/// Row-wise hidden probabilities for a whole batch.
Matrix hidden_probs(const RbmLayer& layer, const Matrix& visible);

/// F(v) = -a.v - sum_j log(1 + exp(b_j + (v W)_j)).
double free_energy(const RbmLayer& layer, std::span<const double> visible);

struct Cd1Result {
  RbmLayer layer;
  double reconstruction_error = 0.0;  // mean squared v0 - v1 over batch cells
};

/// One contrastive-divergence step over a batch of visible rows:
/// h0 ~ Bernoulli(P(h|v0)), v1 = P(v|h0), h1 = P(h|v1), then
/// dW = lr (<v0 h0'> - <v1 h1'>), da = lr <v0 - v1>, db = lr <h0 - h1>.
/// With `mean_field` false, v1 is sampled too.
/// Throws DimensionMismatch / EmptyBatch.
Cd1Result cd1_step(const RbmLayer& layer, const Matrix& batch, double learning_rate, std::mt19937_64& rng,
                   bool mean_field = true);

struct DbnModel {
  std::vector<RbmLayer> layers;
  std::vector<std::size_t> layer_sizes;  // input, hidden 1, ..., hidden L
  TrainConfig config;
  /// Mean reconstruction error per epoch, per layer.
  std::vector<std::vector<double>> training_error;

  std::size_t input_size() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.empty() ? 0 : layer_sizes.back(); }
};

/// [input, ceil(2 input / 3), ceil(input / 3)].
std::vector<std::size_t> default_layer_sizes(std::size_t input);

/// Greedy layer-wise training: each RBM trains on the hidden probabilities
/// of the frozen stack below it. `sizes` starts with the input width.
/// Throws InvalidSizes / EmptyData.
DbnModel train_dbn(const Matrix& data, const TrainConfig& cfg, const std::vector<std::size_t>& sizes);

/// Deterministic forward pass of hidden probabilities through every layer.
/// Throws DimensionMismatch.
Matrix extract_features(const DbnModel& model, const Matrix& data);

/// Versioned JSON (layer sizes, row-major weights, biases, config).
std::string dbn_to_json(const DbnModel& model);
DbnModel dbn_from_json(std::string_view json);

}  // namespace exposome
