// Acceptance run: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "exposome/align.hpp"
#include "exposome/classify.hpp"
#include "exposome/dbn.hpp"
#include "exposome/pipeline.hpp"
#include "exposome/spatial.hpp"
#include "exposome/stats.hpp"
#include "oracles.hpp"

using namespace exposome;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1. OLS against normal equations + t CDF.
Outcome ols_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::size_t> pick_p(2, 6);
  double coef = 0, se = 0, t = 0, p = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t k = pick_p(rng);
    Matrix x(50, k);
    for (auto& v : x.data()) v = g(rng);
    std::vector<double> y(50);
    for (std::size_t i = 0; i < 50; ++i) {
      y[i] = g(rng) + 1.0;
      for (std::size_t j = 0; j < k; ++j) y[i] += g(rng) * 0.1 + 0.5 * x(i, j) * (j % 2 ? 1 : -1);
    }
    const auto got = ols_regress(x, y);
    const auto want = oracle::ols(x, y);
    for (std::size_t j = 0; j <= k; ++j) {
      coef = std::max(coef, std::fabs(got.coefficients[j] - want.coefficients[j]));
      se = std::max(se, std::fabs(got.standard_errors[j] - want.standard_errors[j]));
      t = std::max(t, std::fabs(got.t_stats[j] - want.t_stats[j]));
      p = std::max(p, std::fabs(got.p_values[j] - want.p_values[j]));
    }
  }
  const double secs = since(start);
  return {coef <= 1e-8 && se <= 1e-6 && t <= 1e-6 && p <= 1e-6 && secs < 10,
          fmt("max |d| coef %.2e, SE %.2e, t %.2e, p %.2e; %.2f s", coef, se, t, p, secs)};
}

// 2. Voronoi against brute-force nearest site.
Outcome voronoi_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> pick_n(1, 200);
  double worst_agree = 1.0, worst_area = 0.0;
  for (int set = 0; set < 20; ++set) {
    const BoundingBox box{-800, -600, 900, 1100};
    std::uniform_real_distribution<double> ux(box.min_x, box.max_x), uy(box.min_y, box.max_y);
    std::vector<Site> sites;
    const std::size_t n = set == 0 ? 200 : pick_n(rng);
    for (std::size_t i = 0; i < n; ++i) sites.push_back({{ux(rng), uy(rng)}, 0.0});
    const auto t = voronoi(sites, box);
    double area = 0;
    for (const auto& c : t.cells) area += polygon_area(c.polygon);
    worst_area = std::max(worst_area, std::fabs(area - box.area()) / box.area());
    std::size_t agree = 0, counted = 0;
    for (int q = 0; q < 10000; ++q) {
      const PlanarPoint p{ux(rng), uy(rng)};
      double gap = 0;
      const auto want = oracle::nearest_site(sites, p, &gap);
      if (gap < 1e-9) continue;  // tie
      ++counted;
      std::size_t owner = t.cells.size();
      for (std::size_t c = 0; c < t.cells.size() && owner == t.cells.size(); ++c)
        if (polygon_contains(t.cells[c].polygon, p)) owner = c;
      if (owner < t.cells.size() && t.cells[owner].site.p == sites[want].p) ++agree;
    }
    worst_agree = std::min(worst_agree, static_cast<double>(agree) / static_cast<double>(counted));
  }
  const double secs = since(start);
  return {worst_agree >= 0.999 && worst_area <= 1e-6 && secs < 30,
          fmt("worst agreement %.5f, worst area error %.2e; %.2f s", worst_agree, worst_area, secs)};
}

// 3. Interpolation reproduces affine functions.
Outcome interpolation_exactness() {
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(-1000, 1000), w(0, 1);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double a = u(rng), b = u(rng), x1 = u(rng);
    const double x2 = x1 + 1e-3 + std::fabs(u(rng));
    const double x = x1 + (x2 - x1) * w(rng);
    const double want = a * x + b;
    const double got = interpolate_linear({x1, a * x1 + b, x2, a * x2 + b}, x);
    // Relative to the magnitudes involved, so cancellation near zero
    // is judged against the operands rather than a tiny result.
    const double scale = std::max({std::fabs(want), std::fabs(a * x1 + b), std::fabs(a * x2 + b)});
    worst = std::max(worst, std::fabs(got - want) / scale);
  }
  return {worst <= 1e-12, fmt("worst relative error %.2e over 10000 cases", worst)};
}

// 4. RBM correctness.
Outcome rbm_correctness() {
  const auto start = Clock::now();
  bool half = true;
  const auto zero = RbmLayer::zeros(5, 4);
  for (double p : hidden_probs(zero, std::vector<double>{0, 1, 0.5, 0.2, 1})) half = half && p == 0.5;
  for (double p : visible_probs(zero, std::vector<double>{1, 0, 1, 1})) half = half && p == 0.5;

  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-2, 2);
  double fe = 0;
  for (int rep = 0; rep < 50; ++rep) {
    auto layer = RbmLayer::zeros(2, 2);
    for (auto& v : layer.weights.data()) v = u(rng);
    for (auto& v : layer.visible_bias) v = u(rng);
    for (auto& v : layer.hidden_bias) v = u(rng);
    for (const auto& v : {std::vector<double>{0, 0}, {0, 1}, {1, 0}, {1, 1}})
      fe = std::max(fe, std::fabs(free_energy(layer, v) - oracle::free_energy_by_enumeration(layer, v)));
  }

  const auto patterns = Matrix::from_rows({{0, 1}, {1, 0}});
  int improved = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 r(seed);
    auto layer = RbmLayer::random(2, 2, 0.01, r);
    std::vector<double> err;
    for (int epoch = 0; epoch < 200; ++epoch) {
      auto step = cd1_step(layer, patterns, 0.1, r);
      layer = std::move(step.layer);
      err.push_back(step.reconstruction_error);
    }
    double first = 0, last = 0;
    for (int i = 0; i < 10; ++i) first += err[i], last += err[190 + i];
    improved += last < first;
  }
  const double secs = since(start);
  return {half && fe <= 1e-10 && improved >= 18 && secs < 60,
          fmt("zero-param probs all 0.5: %s; free-energy max |d| %.2e; improved %d/20 seeds; %.2f s",
              half ? "yes" : "no", fe, improved, secs)};
}

// 5. Logistic-regression gradient vs central differences.
Outcome gradient_check() {
  std::mt19937_64 rng(505);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<std::size_t> dim(2, 6);
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t k = dim(rng), p = dim(rng), n = 10 + dim(rng) * 5;
    Matrix w(k, p + 1), x(n, p);
    for (auto& v : w.data()) v = g(rng) * 0.5;
    for (auto& v : x.data()) v = g(rng);
    std::vector<std::size_t> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = i % k;
    Matrix grad;
    logistic_loss_and_gradient(w, x, t, &grad);
    const auto num = oracle::numeric_gradient(w, x, t);
    double diff = 0, norm = 0;
    for (std::size_t i = 0; i < num.data().size(); ++i) {
      diff += std::pow(grad.data()[i] - num.data()[i], 2);
      norm += std::pow(num.data()[i], 2);
    }
    worst = std::max(worst, std::sqrt(diff / norm));
  }
  return {worst <= 1e-4, fmt("worst relative error %.2e over 20 instances", worst)};
}

const EvalReport* find_report(const std::vector<EvalReport>& reps, ModelKind::Type m, FeatureSource f) {
  for (const auto& r : reps)
    if (r.model == m && r.features == f) return &r;
  return nullptr;
}

// 6. Planted signal end to end.
Outcome planted_signal() {
  const auto start = Clock::now();
  PipelineConfig cfg;
  cfg.out_dir = fs::current_path() / "acceptance_out" / "planted";
  cfg.classifiers = {ModelKind::Type::RandomForest};
  cfg.ablation = false;
  PipelineResults res;
  const auto report = run_pipeline(cfg, res);
  if (!report.success()) return {false, "pipeline failed: " + report.failed_stage()->error};
  const auto* dbn = find_report(res.evaluations, ModelKind::Type::RandomForest, FeatureSource::DbnFeatures);
  const auto* stat = find_report(res.evaluations, ModelKind::Type::RandomForest, FeatureSource::StatisticalFeatures);
  const double secs = since(start);
  return {dbn->mean_accuracy >= 0.60 && dbn->mean_accuracy >= stat->mean_accuracy - 0.05 && secs < 300,
          fmt("%zu fused rows; DBN+RF %.4f (>= 0.60), statistical RF %.4f (DBN must be >= %.4f); %.1f s",
              res.table->rows(), dbn->mean_accuracy, stat->mean_accuracy, stat->mean_accuracy - 0.05, secs)};
}

// 7. Modality ablation on a pollution-driven session.
Outcome ablation_pattern() {
  const auto start = Clock::now();
  PipelineConfig cfg;
  cfg.synth = SynthPreset::PollutionDriven;
  cfg.out_dir = fs::current_path() / "acceptance_out" / "ablation";
  cfg.classifiers = {};
  PipelineResults res;
  const auto report = run_pipeline(cfg, res);
  if (!report.success()) return {false, "pipeline failed: " + report.failed_stage()->error};
  const double all = res.ablation[0].mean_accuracy;
  const double pol = res.ablation[1].mean_accuracy;
  const double phy = res.ablation[2].mean_accuracy;
  const double secs = since(start);
  return {pol >= phy && all >= pol - 0.02 && all >= phy - 0.02 && secs < 300,
          fmt("all %.4f, pollution %.4f, physiological %.4f; %.1f s", all, pol, phy, secs)};
}

// 8. PCA properties.
Outcome pca_properties() {
  Matrix line(40, 2);
  for (std::size_t i = 0; i < 40; ++i) line(i, 0) = 0.025 * static_cast<double>(i), line(i, 1) = 1 - 0.7 * line(i, 0);
  const auto l = pca(line, {"a", "b"});
  const double line_err = std::max(std::fabs(l.explained_ratio[0] - 1.0), std::fabs(l.explained_ratio[1]));

  std::mt19937_64 rng(808);
  std::normal_distribution<double> g;
  Matrix m(500, 6);
  for (auto& v : m.data()) v = g(rng);
  for (std::size_t r = 0; r < m.rows(); ++r) m(r, 3) += m(r, 0) - 0.5 * m(r, 1), m(r, 5) *= 3;
  const auto p = pca(m, {"a", "b", "c", "d", "e", "f"});
  double recon = 0;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) {
      double v = p.means[c];
      for (std::size_t k = 0; k < m.cols(); ++k) v += p.scores(r, k) * p.loadings(c, k);
      recon = std::max(recon, std::fabs(v - m(r, c)));
    }
  double total = 0, sum = 0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0, ss = 0;
    for (std::size_t r = 0; r < m.rows(); ++r) mean += m(r, c);
    mean /= static_cast<double>(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) ss += (m(r, c) - mean) * (m(r, c) - mean);
    total += ss / static_cast<double>(m.rows() - 1);
  }
  for (double e : p.eigenvalues) sum += e;
  const double var_err = std::fabs(sum - total) / total;
  return {line_err <= 1e-12 && recon <= 1e-9 && var_err <= 1e-9,
          fmt("line ratio error %.2e; reconstruction %.2e; eigenvalue-sum relative error %.2e", line_err, recon,
              var_err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Two `run` invocations with seed 7 give byte-identical CSV/JSON.
Outcome determinism() {
  const auto base = fs::current_path() / "acceptance_out";
  const fs::path a = base / "run_a", b = base / "run_b";
  fs::remove_all(a);
  fs::remove_all(b);
#ifdef EXPOSOME_CLI
  for (const auto& dir : {a, b}) {
    const std::string cmd = std::string("\"") + EXPOSOME_CLI + "\" run --seed 7 --out \"" + dir.string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "cli run failed"};
  }
#else
  for (const auto& dir : {a, b}) {
    PipelineConfig cfg;
    cfg.out_dir = dir;
    if (!run_pipeline(cfg).success()) return {false, "pipeline failed"};
  }
#endif
  std::size_t compared = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    const auto ext = entry.path().extension();
    if (!entry.is_regular_file() || (ext != ".csv" && ext != ".json" && ext != ".geojson")) continue;
    const auto rel = fs::relative(entry.path(), a);
    ++compared;
    if (!fs::exists(b / rel) || slurp(entry.path()) != slurp(b / rel)) ++differing;
  }
  return {compared >= 10 && differing == 0, fmt("%zu CSV/JSON artifacts compared, %zu differ", compared, differing)};
}

// 10. Paper-scale fuse + stats + spatial.
Outcome scale_smoke() {
  auto synth = SynthConfig::defaults();
  synth.duration_s = 13657;
  auto bundle = generate_synthetic_session(synth, 10).bundle;
  // Slow streams stop on their own period; close each at the session end
  // so the overlap spans all 13,658 seconds.
  for (auto& s : bundle.streams)
    if (s.samples.back().t_ms < 13657000) s.samples.push_back({13657000, s.samples.back().value});
  const auto start = Clock::now();
  const auto table = fuse(bundle);
  const auto names = table.channel_names();
  pearson_matrix(table, names);
  pca(table, names);
  ols_regress(table, "EDA", table.channel_names(ChannelKind::Environment));
  const auto r = ols_regress(table, "HR", table.channel_names(ChannelKind::Environment));
  qq_data(r.residuals);
  const auto proj = LocalProjection::centered_on(table);
  const auto sites = sites_from_table(table, "label", proj);
  const std::vector<double> bins{1.5, 2.5, 3.5, 4.5};
  const auto t = classify_cells(voronoi(sites, bbox_around(sites, 50), proj), bins);
  grid_heatmap(table, "PM2.5", 25);
  export_geojson(t);
  export_svg(t);
  const double secs = since(start);
  return {table.rows() == 13658 && table.channels.size() == 14 && secs < 30,
          fmt("%zu rows x %zu channels, %zu Voronoi cells; %.2f s", table.rows(), table.channels.size(),
              t.cells.size(), secs)};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"OLS oracle equivalence", ols_oracle},
      {"Voronoi oracle equivalence", voronoi_oracle},
      {"interpolation exactness", interpolation_exactness},
      {"RBM correctness", rbm_correctness},
      {"logistic gradient check", gradient_check},
      {"planted signal end-to-end", planted_signal},
      {"modality ablation pattern", ablation_pattern},
      {"PCA properties", pca_properties},
      {"determinism", determinism},
      {"scale smoke", scale_smoke},
  };
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %2d %-28s %s  %s\n", index, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
