#pragma once
// Reference implementations the tests compare the library against. They
// share no code with the library beyond its plain data types.

#include <cstddef>
#include <span>
#include <vector>

#include "exposome/classify.hpp"
#include "exposome/dbn.hpp"
#include "exposome/ingest.hpp"
#include "exposome/matrix.hpp"
#include "exposome/spatial.hpp"

namespace oracle {

using exposome::Matrix;

struct Ols {
  std::vector<double> coefficients;  // intercept first
  std::vector<double> standard_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
};

/// Normal equations (X'X) b = X'y solved with Eigen; p-values from
/// Boost's Student t distribution.
Ols ols(const Matrix& predictors, std::span<const double> y);

/// Index of the closest site; `gap` receives second-best minus best
/// distance so callers can skip near-ties.
std::size_t nearest_site(std::span<const exposome::Site> sites, exposome::PlanarPoint q, double* gap = nullptr);

/// -log sum_h exp(-E(v, h)) by enumerating every binary hidden state.
double free_energy_by_enumeration(const exposome::RbmLayer& layer, std::span<const double> v);

/// Layer-by-layer hidden probabilities with plain loops.
Matrix forward_features(const exposome::DbnModel& model, const Matrix& data);

/// Mean softmax cross-entropy, computed directly.
double softmax_loss(const Matrix& weights, const Matrix& x, std::span<const std::size_t> targets);

/// Central-difference gradient of softmax_loss.
Matrix numeric_gradient(const Matrix& weights, const Matrix& x, std::span<const std::size_t> targets,
                        double step = 1e-5);

/// argmax over classes of log prior + sum of Gaussian log densities.
std::size_t nb_argmax(const exposome::GaussianNbModel& model, std::span<const double> row);

/// Pearson r between PM2.5 and EDA implied by the planted coefficients of
/// a synthetic config and the realized latent paths over [t0, t1] seconds,
/// accounting for the noise each channel keeps after 1 Hz resampling.
double planted_correlation(const exposome::SynthConfig& cfg, const exposome::SynthGroundTruth& truth,
                           std::size_t t0, std::size_t t1, const std::string& env = "PM2.5",
                           const std::string& physio = "EDA");

}  // namespace oracle
