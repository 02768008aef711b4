#include <cmath>
#include <random>
#include <regex>

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "exposome/error.hpp"
#include "exposome/spatial.hpp"
#include "oracles.hpp"

using namespace exposome;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exposome::Error");
  return ErrorKind::StageError;
}

std::vector<Site> random_sites(std::size_t n, const BoundingBox& box, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(box.min_x, box.max_x), uy(box.min_y, box.max_y);
  std::vector<Site> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{ux(rng), uy(rng)}, static_cast<double>(i)});
  return out;
}

// A table with a geo fix and the given channel value on every row.
FusedFrameTable geo_table(const std::vector<std::pair<double, double>>& positions, const std::vector<double>& values) {
  FusedFrameTable t;
  t.channels = {{"X", "u", 1.0, ChannelKind::Environment}};
  t.scaling = {{0.0, 1.0}};
  t.values = Matrix(positions.size(), 1);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    t.times_s.push_back(static_cast<std::int64_t>(i));
    t.lat.push_back(positions[i].first);
    t.lon.push_back(positions[i].second);
    t.values(i, 0) = values[i];
    t.labels.push_back(std::nullopt);
  }
  return t;
}

}  // namespace

TEST_CASE("projection round-trips") {
  const LocalProjection proj{52.95, -1.15};
  const auto p = proj.forward(52.951, -1.149);
  const auto [lat, lon] = proj.inverse(p);
  CHECK(lat == doctest::Approx(52.951).epsilon(1e-12));
  CHECK(lon == doctest::Approx(-1.149).epsilon(1e-12));
  // One millidegree of latitude is ~111 m.
  CHECK(p.y == doctest::Approx(111.195).epsilon(1e-3));
}

TEST_CASE("one site covers the whole box") {
  const BoundingBox box{0, 0, 10, 5};
  const std::vector<Site> sites{{{3, 3}, 1.0}};
  const auto t = voronoi(sites, box);
  REQUIRE(t.cells.size() == 1);
  CHECK(polygon_area(t.cells[0].polygon) == doctest::Approx(50.0));
  CHECK(t.cells[0].polygon.size() == 4);
}

TEST_CASE("two symmetric sites split the box in half") {
  const BoundingBox box{-10, -4, 10, 4};
  const std::vector<Site> sites{{{-3, 1}, 0.0}, {{3, -1}, 1.0}};
  const auto t = voronoi(sites, box);
  REQUIRE(t.cells.size() == 2);
  const double a0 = polygon_area(t.cells[0].polygon);
  const double a1 = polygon_area(t.cells[1].polygon);
  CHECK(std::fabs(a0 - a1) <= 1e-9);
  CHECK(a0 + a1 == doctest::Approx(box.area()).epsilon(1e-12));
  // Every cell vertex lies on the near side of (or on) the bisector.
  for (const auto& v : t.cells[0].polygon)
    CHECK(std::hypot(v.x + 3, v.y - 1) <= std::hypot(v.x - 3, v.y + 1) + 1e-9);
}

TEST_CASE("random tessellations agree with brute-force nearest site") {
  std::mt19937_64 rng(17);
  const BoundingBox box{-500, -300, 700, 900};
  std::uniform_real_distribution<double> qx(box.min_x, box.max_x), qy(box.min_y, box.max_y);
  for (std::size_t n : {2u, 7u, 50u, 200u}) {
    const auto sites = random_sites(n, box, rng);
    const auto t = voronoi(sites, box);
    REQUIRE(t.cells.size() == n);
    double area = 0;
    for (const auto& c : t.cells) {
      area += polygon_area(c.polygon);
      CHECK(polygon_area(c.polygon) > 0);
    }
    CHECK(std::fabs(area - box.area()) <= 1e-6 * box.area());
    std::size_t agree = 0, counted = 0;
    for (int q = 0; q < 10000; ++q) {
      const PlanarPoint p{qx(rng), qy(rng)};
      double gap = 0;
      const auto want = oracle::nearest_site(sites, p, &gap);
      if (gap < 1e-6) continue;
      ++counted;
      // Cells keep input order when no duplicates exist.
      if (polygon_contains(t.cells[want].polygon, p)) ++agree;
    }
    CHECK(static_cast<double>(agree) >= 0.999 * static_cast<double>(counted));
  }
}

TEST_CASE("duplicate sites merge with their mean value") {
  const BoundingBox box{0, 0, 10, 10};
  const std::vector<Site> sites{{{2, 2}, 1.0}, {{8, 8}, 5.0}, {{2, 2}, 3.0}};
  const auto t = voronoi(sites, box);
  REQUIRE(t.cells.size() == 2);
  CHECK(t.cells[0].site.value == 2.0);
}

TEST_CASE("voronoi error conditions") {
  const BoundingBox box{0, 0, 1, 1};
  CHECK(kind_of([&] { voronoi(std::vector<Site>{}, box); }) == ErrorKind::NoSites);
  const std::vector<Site> outside{{{5, 5}, 0.0}};
  CHECK(kind_of([&] { voronoi(outside, box); }) == ErrorKind::SiteOutsideBox);
}

TEST_CASE("classify_cells binning") {
  const BoundingBox box{0, 0, 30, 10};
  const std::vector<Site> sites{{{5, 5}, 0.1}, {{15, 5}, 0.5}, {{25, 5}, 0.9}};
  const std::vector<double> bins{0.33, 0.66};
  const auto t = classify_cells(voronoi(sites, box), bins);
  CHECK(t.cells[0].class_value == 0);
  CHECK(t.cells[1].class_value == 1);
  CHECK(t.cells[2].class_value == 2);

  const std::vector<Site> same{{{5, 5}, 0.4}, {{15, 5}, 0.4}, {{25, 5}, 0.4}};
  const auto u = classify_cells(voronoi(same, box), bins);
  CHECK(u.cells[0].class_value == u.cells[1].class_value);
  CHECK(u.cells[1].class_value == u.cells[2].class_value);

  const std::vector<double> bad{0.66, 0.33};
  CHECK(kind_of([&] { classify_cells(voronoi(sites, box), bad); }) == ErrorKind::UnsortedBins);
}

TEST_CASE("label-valued sites map to valence - 1") {
  const BoundingBox box{0, 0, 50, 10};
  std::vector<Site> sites;
  for (int v = 1; v <= 5; ++v) sites.push_back({{v * 10.0 - 5, 5}, static_cast<double>(v)});
  const std::vector<double> bins{1.5, 2.5, 3.5, 4.5};
  const auto t = classify_cells(voronoi(sites, box), bins);
  for (const auto& c : t.cells) CHECK(c.class_value == c.site.value - 1);
}

TEST_CASE("heat grid: single cell") {
  const auto table = geo_table({{52.95, -1.15}, {52.95, -1.15}, {52.95, -1.15}}, {0.4, 0.4, 0.4});
  const auto g = grid_heatmap(table, "X", 25.0);
  std::size_t populated = 0;
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c)
      if (g.count(r, c)) {
        ++populated;
        CHECK(g.values(r, c) == doctest::Approx(0.4));
        CHECK(g.count(r, c) == 3);
      }
  CHECK(populated == 1);
}

TEST_CASE("heat grid: two clusters, conservation of counts") {
  std::vector<std::pair<double, double>> pos;
  std::vector<double> vals;
  for (int i = 0; i < 4; ++i) pos.push_back({52.95, -1.15}), vals.push_back(0.0);
  for (int i = 0; i < 6; ++i) pos.push_back({52.951, -1.148}), vals.push_back(1.0);
  pos.push_back({kMissing, kMissing});
  vals.push_back(0.5);
  const auto g = grid_heatmap(geo_table(pos, vals), "X", 20.0);
  std::size_t total = 0;
  std::vector<std::pair<double, std::size_t>> cells;
  for (std::size_t r = 0; r < g.rows; ++r)
    for (std::size_t c = 0; c < g.cols; ++c)
      if (g.count(r, c)) cells.push_back({g.values(r, c), g.count(r, c)}), total += g.count(r, c);
  CHECK(total == 10);
  REQUIRE(cells.size() == 2);
  std::sort(cells.begin(), cells.end());
  CHECK(cells[0] == std::pair<double, std::size_t>{0.0, 4});
  CHECK(cells[1] == std::pair<double, std::size_t>{1.0, 6});
}

TEST_CASE("heat grid errors") {
  const auto table = geo_table({{kMissing, kMissing}}, {0.4});
  CHECK(kind_of([&] { grid_heatmap(table, "X", 25.0); }) == ErrorKind::NoGeoRows);
  const auto ok = geo_table({{52.95, -1.15}}, {0.4});
  CHECK(kind_of([&] { grid_heatmap(ok, "X", 0.0); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("geojson: one closed rectangle per cell") {
  const LocalProjection proj{52.95, -1.15};
  const BoundingBox box{-50, -50, 50, 50};
  const std::vector<Site> one{{{0, 0}, 3.0}};
  const auto doc = nlohmann::json::parse(export_geojson(voronoi(one, box, proj)));
  CHECK(doc["type"] == "FeatureCollection");
  REQUIRE(doc["features"].size() == 1);
  const auto& ring = doc["features"][0]["geometry"]["coordinates"][0];
  CHECK(doc["features"][0]["geometry"]["type"] == "Polygon");
  CHECK(ring.size() == 5);
  CHECK(ring.front() == ring.back());
}

TEST_CASE("geojson: n features, areas survive a re-parse") {
  std::mt19937_64 rng(3);
  const LocalProjection proj{52.95, -1.15};
  const BoundingBox box{-400, -400, 400, 400};
  const auto t = voronoi(random_sites(40, box, rng), box, proj);
  const auto doc = nlohmann::json::parse(export_geojson(t));
  REQUIRE(doc["features"].size() == t.cells.size());
  for (std::size_t i = 0; i < t.cells.size(); ++i) {
    std::vector<PlanarPoint> ring;
    for (const auto& c : doc["features"][i]["geometry"]["coordinates"][0])
      ring.push_back(proj.forward(c[1].get<double>(), c[0].get<double>()));
    ring.pop_back();
    const double want = polygon_area(t.cells[i].polygon);
    CHECK(std::fabs(polygon_area(ring) - want) <= 1e-6 * want);
  }
}

TEST_CASE("svg has one polygon per cell") {
  const BoundingBox box{0, 0, 30, 30};
  const std::vector<Site> sites{{{5, 5}, 1.0}, {{20, 8}, 2.0}, {{12, 25}, 4.0}};
  const std::vector<double> bins{1.5, 2.5, 3.5, 4.5};
  const auto svg = export_svg(classify_cells(voronoi(sites, box), bins));
  const std::regex poly("<polygon ");
  const auto n = std::distance(std::sregex_iterator(svg.begin(), svg.end(), poly), std::sregex_iterator());
  CHECK(n == 3);
  CHECK(svg.rfind("<svg", 0) != std::string::npos);
}

TEST_CASE("sites from a synthetic route") {
  const auto table = fuse(generate_synthetic_session(SynthConfig::defaults(), 42).bundle);
  const auto proj = LocalProjection::centered_on(table);
  const auto sites = sites_from_table(table, "label", proj);
  CHECK(sites.size() > 100);
  for (const auto& s : sites) {
    CHECK(s.value >= 1);
    CHECK(s.value <= 5);
  }
  const auto box = bbox_around(sites, 50.0);
  for (const auto& s : sites) CHECK(box.contains(s.p));
  const auto t = voronoi(sites, box, proj);
  double area = 0;
  for (const auto& c : t.cells) area += polygon_area(c.polygon);
  CHECK(std::fabs(area - box.area()) <= 1e-6 * box.area());
}
