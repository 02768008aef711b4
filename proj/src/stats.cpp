#include "exposome/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "exposome/error.hpp"
#include "exposome/special.hpp"
#include "text_io.hpp"

namespace exposome {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorKind::DimensionMismatch, "pearson inputs differ in length");
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_missing(x[i]) || is_missing(y[i])) continue;
    sx += x[i];
    sy += y[i];
    ++n;
  }
  if (n < 2) throw Error(ErrorKind::InsufficientData, "fewer than 2 complete pairs");
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (is_missing(x[i]) || is_missing(y[i])) continue;
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ZeroVariance, "constant input to pearson");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationMatrix pearson_matrix(const FusedFrameTable& table, const std::vector<std::string>& channels) {
  CorrelationMatrix m{channels, Matrix(channels.size(), channels.size())};
  std::vector<std::vector<double>> cols;
  for (const auto& name : channels) cols.push_back(table.column(name));
  for (std::size_t i = 0; i < cols.size(); ++i) {
    m.r(i, i) = 1.0;
    for (std::size_t j = i + 1; j < cols.size(); ++j) {
      double r = 0.0;
      try {
        r = pearson(cols[i], cols[j]);
      } catch (const Error& e) {
        throw Error(e.kind(), channels[i] + " vs " + channels[j] + ": " + e.what());
      }
      m.r(i, j) = m.r(j, i) = r;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------

SymmetricEigen jacobi_eigen(const Matrix& symmetric, double tolerance) {
  const std::size_t n = symmetric.rows();
  if (symmetric.cols() != n) throw Error(ErrorKind::DimensionMismatch, "eigen input not square");
  Matrix a = symmetric;
  Matrix v = Matrix::identity(n);

  double frobenius = 0.0;
  for (double x : a.data()) frobenius += x * x;
  const double threshold = tolerance * std::max(1.0, std::sqrt(frobenius));

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) < threshold) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });
  SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// Rows of the named channels with no missing cell.
Matrix complete_rows(const FusedFrameTable& table, const std::vector<std::size_t>& cols) {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    bool ok = true;
    for (auto c : cols) ok = ok && !is_missing(table.values(r, c));
    if (ok) rows.push_back(r);
  }
  return table.values.take_rows(rows).take_cols(cols);
}

}  // namespace

PcaResult pca(const FusedFrameTable& table, const std::vector<std::string>& channels) {
  std::vector<std::size_t> cols;
  for (const auto& name : channels) cols.push_back(table.require_index(name));
  return pca(complete_rows(table, cols), channels);
}

PcaResult pca(const Matrix& data, const std::vector<std::string>& channels) {
  const std::size_t n = data.rows();
  const std::size_t p = data.cols();
  if (p == 0 || n < p + 1)
    throw Error(ErrorKind::InsufficientData, "PCA needs at least channels + 1 complete rows");

  PcaResult out;
  out.channels = channels;
  out.means.assign(p, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) out.means[c] += data(r, c);
  for (auto& m : out.means) m /= static_cast<double>(n);

  Matrix centered(n, p);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < p; ++c) centered(r, c) = data(r, c) - out.means[c];

  Matrix cov(p, p);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = centered.row(r);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i; j < p; ++j) cov(i, j) += row[i] * row[j];
  }
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j) cov(j, i) = cov(i, j) = cov(i, j) / static_cast<double>(n - 1);

  auto eig = jacobi_eigen(cov);
  double total = 0.0;
  for (auto& v : eig.values) {
    v = std::max(v, 0.0);
    total += v;
  }
  if (!(total > 0.0)) throw Error(ErrorKind::InsufficientData, "data has no variance");

  out.eigenvalues = eig.values;
  for (double v : eig.values) out.explained_ratio.push_back(v / total);

  out.loadings = eig.vectors;
  for (std::size_t k = 0; k < p; ++k) {
    std::size_t arg = 0;
    for (std::size_t i = 1; i < p; ++i)
      if (std::fabs(out.loadings(i, k)) > std::fabs(out.loadings(arg, k))) arg = i;
    if (out.loadings(arg, k) < 0.0)
      for (std::size_t i = 0; i < p; ++i) out.loadings(i, k) = -out.loadings(i, k);
  }
  out.scores = centered * out.loadings;

  out.contributions = Matrix(p, p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t k = 0; k < p; ++k) out.contributions(i, k) = out.loadings(i, k) * out.loadings(i, k);

  const std::size_t shown = std::min<std::size_t>(2, p);
  double weight = 0.0;
  for (std::size_t k = 0; k < shown; ++k) weight += out.explained_ratio[k];
  out.importance.assign(p, 0.0);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < shown; ++k) out.importance[i] += out.contributions(i, k) * out.explained_ratio[k];
    if (weight > 0.0) out.importance[i] /= weight;
  }
  return out;
}

// ---------------------------------------------------------------------------

RegressionResult ols_regress(const Matrix& predictors, std::span<const double> response,
                             std::vector<std::string> predictor_names, std::string response_name) {
  const std::size_t n = predictors.rows();
  const std::size_t p = predictors.cols();
  const std::size_t k = p + 1;
  if (response.size() != n) throw Error(ErrorKind::DimensionMismatch, "response length != rows");
  if (n <= k) throw Error(ErrorKind::InsufficientData, "need more observations than predictors + 1");
  if (predictor_names.empty())
    for (std::size_t j = 0; j < p; ++j) predictor_names.push_back("x" + std::to_string(j + 1));

  // Householder QR of the design matrix [1 | X].
  Matrix qr(n, k);
  for (std::size_t r = 0; r < n; ++r) {
    qr(r, 0) = 1.0;
    for (std::size_t c = 0; c < p; ++c) qr(r, c + 1) = predictors(r, c);
  }
  std::vector<double> qty(response.begin(), response.end());
  std::vector<double> diag(k);
  double max_norm = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm += qr(r, c) * qr(r, c);
    max_norm = std::max(max_norm, std::sqrt(norm));
  }
  for (std::size_t c = 0; c < k; ++c) {
    double norm = 0.0;
    for (std::size_t r = c; r < n; ++r) norm += qr(r, c) * qr(r, c);
    norm = std::sqrt(norm);
    if (norm <= 1e-10 * max_norm) throw Error(ErrorKind::RankDeficient, "design matrix is rank deficient");
    const double alpha = qr(c, c) > 0.0 ? -norm : norm;
    // v = x - alpha e1, stored in place below the diagonal.
    qr(c, c) -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t r = c; r < n; ++r) vnorm2 += qr(r, c) * qr(r, c);
    auto reflect = [&](auto&& get) {
      double dot = 0.0;
      for (std::size_t r = c; r < n; ++r) dot += qr(r, c) * get(r);
      return 2.0 * dot / vnorm2;
    };
    for (std::size_t j = c + 1; j < k; ++j) {
      const double f = reflect([&](std::size_t r) { return qr(r, j); });
      for (std::size_t r = c; r < n; ++r) qr(r, j) -= f * qr(r, c);
    }
    const double f = reflect([&](std::size_t r) { return qty[r]; });
    for (std::size_t r = c; r < n; ++r) qty[r] -= f * qr(r, c);
    diag[c] = alpha;
  }
  double max_diag = 0.0;
  for (double d : diag) max_diag = std::max(max_diag, std::fabs(d));
  for (double d : diag)
    if (std::fabs(d) <= 1e-10 * max_diag) throw Error(ErrorKind::RankDeficient, "design matrix is rank deficient");

  auto r_at = [&](std::size_t i, std::size_t j) { return i == j ? diag[i] : qr(i, j); };

  RegressionResult out;
  out.response = std::move(response_name);
  out.predictors = std::move(predictor_names);
  out.observations = n;
  out.degrees_of_freedom = n - k;

  out.coefficients.assign(k, 0.0);
  for (std::size_t i = k; i-- > 0;) {
    double s = qty[i];
    for (std::size_t j = i + 1; j < k; ++j) s -= r_at(i, j) * out.coefficients[j];
    out.coefficients[i] = s / diag[i];
  }

  double rss = 0.0;
  double mean_y = 0.0;
  for (double y : response) mean_y += y;
  mean_y /= static_cast<double>(n);
  double tss = 0.0;
  out.fitted.resize(n);
  out.residuals.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    double f = out.coefficients[0];
    for (std::size_t c = 0; c < p; ++c) f += out.coefficients[c + 1] * predictors(r, c);
    out.fitted[r] = f;
    out.residuals[r] = response[r] - f;
    rss += out.residuals[r] * out.residuals[r];
    tss += (response[r] - mean_y) * (response[r] - mean_y);
  }
  out.r_squared = tss > 0.0 ? std::clamp(1.0 - rss / tss, 0.0, 1.0) : 1.0;
  out.residual_variance = rss / static_cast<double>(out.degrees_of_freedom);

  // diag((X'X)^-1) = row norms of R^-1.
  Matrix rinv(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    rinv(j, j) = 1.0 / diag[j];
    for (std::size_t i = j; i-- > 0;) {
      double s = 0.0;
      for (std::size_t m = i + 1; m <= j; ++m) s += r_at(i, m) * rinv(m, j);
      rinv(i, j) = -s / diag[i];
    }
  }
  const double dof = static_cast<double>(out.degrees_of_freedom);
  for (std::size_t i = 0; i < k; ++i) {
    double v = 0.0;
    for (std::size_t j = i; j < k; ++j) v += rinv(i, j) * rinv(i, j);
    const double se = std::sqrt(out.residual_variance * v);
    const double beta = out.coefficients[i];
    double t = 0.0;
    if (se > 0.0) {
      t = beta / se;
    } else {
      t = beta == 0.0 ? std::numeric_limits<double>::quiet_NaN() : std::copysign(HUGE_VAL, beta);
    }
    out.standard_errors.push_back(se);
    out.t_stats.push_back(t);
    out.p_values.push_back(special::student_t_two_sided_p(t, dof));
  }
  return out;
}

RegressionResult ols_regress(const FusedFrameTable& table, const std::string& response,
                             const std::vector<std::string>& predictors) {
  std::vector<std::size_t> cols;
  for (const auto& name : predictors) cols.push_back(table.require_index(name));
  cols.push_back(table.require_index(response));
  const Matrix complete = complete_rows(table, cols);
  std::vector<std::size_t> pred_idx(predictors.size());
  std::iota(pred_idx.begin(), pred_idx.end(), 0);
  return ols_regress(complete.take_cols(pred_idx), complete.column(predictors.size()), predictors, response);
}

std::vector<std::pair<double, double>> qq_data(std::span<const double> residuals) {
  const std::size_t n = residuals.size();
  if (n < 3) throw Error(ErrorKind::InsufficientData, "Q-Q needs at least 3 values");
  const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double r : residuals) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw Error(ErrorKind::ZeroVariance, "residuals are constant");
  std::vector<double> sorted(residuals.begin(), residuals.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<double, double>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double prob = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    out.emplace_back(special::normal_quantile(prob), (sorted[i] - mean) / sd);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string correlation_csv(const CorrelationMatrix& m) {
  std::string out = "channel";
  for (const auto& c : m.channels) out += ',' + c;
  out += '\n';
  for (std::size_t i = 0; i < m.channels.size(); ++i) {
    out += m.channels[i];
    for (std::size_t j = 0; j < m.channels.size(); ++j) out += ',' + detail::format_double(m.r(i, j));
    out += '\n';
  }
  return out;
}

std::string regression_csv(const RegressionResult& r) {
  std::string out = "term,Coefficients,Standard Error,t Stat,P-value\n";
  for (std::size_t i = 0; i < r.coefficients.size(); ++i) {
    out += i == 0 ? std::string("Intercept") : r.predictors[i - 1];
    for (double v : {r.coefficients[i], r.standard_errors[i], r.t_stats[i], r.p_values[i]})
      out += ',' + detail::format_double(v);
    out += '\n';
  }
  return out;
}

std::string pca_json(const PcaResult& p) {
  nlohmann::ordered_json j;
  j["channels"] = p.channels;
  j["eigenvalues"] = p.eigenvalues;
  j["explained_ratio"] = p.explained_ratio;
  auto rows = [](const Matrix& m) {
    std::vector<std::vector<double>> out;
    for (std::size_t r = 0; r < m.rows(); ++r) out.emplace_back(m.row(r).begin(), m.row(r).end());
    return out;
  };
  j["loadings"] = rows(p.loadings);
  j["contributions"] = rows(p.contributions);
  j["importance"] = p.importance;
  return j.dump(2) + "\n";
}

std::string qq_csv(const std::vector<std::pair<double, double>>& points) {
  std::string out = "theoretical,sample\n";
  for (const auto& [t, s] : points) out += detail::format_double(t) + ',' + detail::format_double(s) + '\n';
  return out;
}

}  // namespace exposome
