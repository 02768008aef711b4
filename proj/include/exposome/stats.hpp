#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "exposome/align.hpp"
#include "exposome/matrix.hpp"

namespace exposome {

struct CorrelationMatrix {
  std::vector<std::string> channels;
  Matrix r;
};

/// Pearson r of two equal-length vectors, skipping pairs with a missing side.
/// Throws InsufficientData (< 2 complete pairs) / ZeroVariance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Pairwise-deletion correlation matrix over the named channels.
CorrelationMatrix pearson_matrix(const FusedFrameTable& table, const std::vector<std::string>& channels);

struct SymmetricEigen {
  std::vector<double> values;  // descending
  Matrix vectors;              // column k pairs with values[k]
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm is below
/// `tolerance`.
SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance = 1e-12);

struct PcaResult {
  std::vector<std::string> channels;
  std::vector<double> means;
  std::vector<double> eigenvalues;      // descending, >= 0
  std::vector<double> explained_ratio;  // sums to 1
  Matrix loadings;                      // channels x components, orthonormal columns
  Matrix scores;                        // rows x components
  /// Squared loadings: share of each component's direction owed to each
  /// channel. Columns sum to 1.
  Matrix contributions;
  /// Per-channel importance on the first two components: squared loadings
  /// weighted by explained ratio; sums to 1 over channels.
  std::vector<double> importance;
};

/// PCA on the covariance of the (already min-max scaled) columns, listwise
/// deletion of incomplete rows. Each loading column has its largest-magnitude
/// entry positive. Throws InsufficientData.
PcaResult pca(const FusedFrameTable& table, const std::vector<std::string>& channels);
PcaResult pca(const Matrix& data, const std::vector<std::string>& channels);

struct RegressionResult {
  std::string response;
  std::vector<std::string> predictors;
  // Aligned vectors, intercept first.
  std::vector<double> coefficients;
  std::vector<double> standard_errors;
  std::vector<double> t_stats;
  std::vector<double> p_values;
  std::vector<double> residuals;
  std::vector<double> fitted;
  double r_squared = 0.0;
  double residual_variance = 0.0;
  std::size_t observations = 0;
  std::size_t degrees_of_freedom = 0;
};

/// OLS with intercept. `predictors` is n x p without the intercept column.
/// Throws InsufficientData (n <= p + 1) / RankDeficient.
RegressionResult ols_regress(const Matrix& predictors, std::span<const double> response,
                             std::vector<std::string> predictor_names = {}, std::string response_name = "y");

/// Same, over table channels with listwise deletion.
RegressionResult ols_regress(const FusedFrameTable& table, const std::string& response,
                             const std::vector<std::string>& predictors);

/// (theoretical, sample) quantile pairs: sorted standardized residuals
/// against the normal quantile of (i - 0.5) / n.
/// Throws InsufficientData (n < 3) / ZeroVariance.
std::vector<std::pair<double, double>> qq_data(std::span<const double> residuals);

// Serialization.
std::string correlation_csv(const CorrelationMatrix& m);
std::string regression_csv(const RegressionResult& r);
std::string pca_json(const PcaResult& p);
std::string qq_csv(const std::vector<std::pair<double, double>>& points);

}  // namespace exposome
