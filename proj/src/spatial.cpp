#include "exposome/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>

#include <nlohmann/json.hpp>

#include "exposome/error.hpp"
#include "text_io.hpp"

namespace exposome {
namespace {

constexpr double kEarthRadiusM = 6371008.8;
constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

PlanarPoint LocalProjection::forward(double lat, double lon) const {
  return {kEarthRadiusM * (lon - lon0) * kDegToRad * std::cos(lat0 * kDegToRad),
          kEarthRadiusM * (lat - lat0) * kDegToRad};
}

std::pair<double, double> LocalProjection::inverse(PlanarPoint p) const {
  return {lat0 + p.y / (kEarthRadiusM * kDegToRad),
          lon0 + p.x / (kEarthRadiusM * kDegToRad * std::cos(lat0 * kDegToRad))};
}

LocalProjection LocalProjection::centered_on(const FusedFrameTable& table) {
  double lat = 0.0, lon = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (is_missing(table.lat[r]) || is_missing(table.lon[r])) continue;
    lat += table.lat[r];
    lon += table.lon[r];
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::NoGeoRows, "table has no geo-tagged rows");
  return {lat / static_cast<double>(n), lon / static_cast<double>(n)};
}

double polygon_area(std::span<const PlanarPoint> ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % ring.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

bool polygon_contains(std::span<const PlanarPoint> ring, PlanarPoint q, double eps) {
  if (ring.size() < 3) return false;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % ring.size()];
    const double cross = (b.x - a.x) * (q.y - a.y) - (b.y - a.y) * (q.x - a.x);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (cross < -eps * std::max(1.0, len)) return false;
  }
  return true;
}

namespace {

// Keeps the part of a convex ring on `site`'s side of the bisector with
// `other`: (other - site) . (v - mid) <= 0.
std::vector<PlanarPoint> clip_to_bisector(const std::vector<PlanarPoint>& ring, PlanarPoint site,
                                          PlanarPoint other) {
  const double nx = other.x - site.x;
  const double ny = other.y - site.y;
  const double mx = 0.5 * (site.x + other.x);
  const double my = 0.5 * (site.y + other.y);
  auto side = [&](PlanarPoint v) { return nx * (v.x - mx) + ny * (v.y - my); };

  std::vector<PlanarPoint> out;
  out.reserve(ring.size() + 1);
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const auto& a = ring[i];
    const auto& b = ring[(i + 1) % ring.size()];
    const double fa = side(a);
    const double fb = side(b);
    if (fa <= 0.0) out.push_back(a);
    if ((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0)) {
      const double u = fa / (fa - fb);
      out.push_back({a.x + u * (b.x - a.x), a.y + u * (b.y - a.y)});
    }
  }
  return out;
}

// Uniform bucket grid over the box for nearest-neighbor ring scans.
class SiteGrid {
 public:
  SiteGrid(std::span<const Site> sites, const BoundingBox& box) : box_(box) {
    const double area = std::max(box.area(), 1e-12);
    cell_ = std::sqrt(2.0 * area / static_cast<double>(sites.size()));
    if (!(cell_ > 0.0)) cell_ = 1.0;
    cols_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(box.width() / cell_)));
    rows_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(box.height() / cell_)));
    // Cap the bucket count for degenerate (very thin) boxes.
    while (cols_ * rows_ > 4 * sites.size() + 16) {
      cell_ *= 1.5;
      cols_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(box.width() / cell_)));
      rows_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(box.height() / cell_)));
    }
    buckets_.resize(cols_ * rows_);
    for (std::size_t i = 0; i < sites.size(); ++i) {
      const auto [c, r] = cell_of(sites[i].p);
      buckets_[r * cols_ + c].push_back(i);
    }
  }

  std::pair<std::size_t, std::size_t> cell_of(PlanarPoint p) const {
    auto c = static_cast<std::size_t>(std::clamp((p.x - box_.min_x) / cell_, 0.0, static_cast<double>(cols_ - 1)));
    auto r = static_cast<std::size_t>(std::clamp((p.y - box_.min_y) / cell_, 0.0, static_cast<double>(rows_ - 1)));
    return {c, r};
  }

  double cell_size() const { return cell_; }
  std::size_t max_ring() const { return std::max(cols_, rows_); }

  /// Calls fn(site index) for every site in the square ring at Chebyshev
  /// distance `ring` from bucket (c, r).
  template <typename Fn>
  void for_ring(std::size_t c, std::size_t r, std::size_t ring, Fn&& fn) const {
    const auto ci = static_cast<long>(c), ri = static_cast<long>(r), k = static_cast<long>(ring);
    for (long dr = -k; dr <= k; ++dr) {
      for (long dc = -k; dc <= k; ++dc) {
        if (std::max(std::labs(dr), std::labs(dc)) != k) continue;
        const long cc = ci + dc, rr = ri + dr;
        if (cc < 0 || rr < 0 || cc >= static_cast<long>(cols_) || rr >= static_cast<long>(rows_)) continue;
        for (auto idx : buckets_[static_cast<std::size_t>(rr) * cols_ + static_cast<std::size_t>(cc)]) fn(idx);
      }
    }
  }

 private:
  BoundingBox box_;
  double cell_ = 1.0;
  std::size_t cols_ = 1;
  std::size_t rows_ = 1;
  std::vector<std::vector<std::size_t>> buckets_;
};

std::vector<Site> merge_duplicates(std::span<const Site> sites) {
  std::map<std::pair<double, double>, std::pair<double, std::size_t>> merged;
  std::vector<std::pair<double, double>> order;
  for (const auto& s : sites) {
    const auto key = std::make_pair(s.p.x, s.p.y);
    auto [it, inserted] = merged.try_emplace(key, 0.0, 0);
    if (inserted) order.push_back(key);
    it->second.first += s.value;
    it->second.second += 1;
  }
  std::vector<Site> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    const auto& [sum, count] = merged[key];
    out.push_back({{key.first, key.second}, sum / static_cast<double>(count)});
  }
  return out;
}

}  // namespace

Tessellation voronoi(std::span<const Site> input, const BoundingBox& bbox, const LocalProjection& projection) {
  if (input.empty()) throw Error(ErrorKind::NoSites, "no sites");
  if (!(bbox.width() > 0.0) || !(bbox.height() > 0.0))
    throw Error(ErrorKind::InvalidConfig, "bounding box has no area");
  for (const auto& s : input) {
    if (!std::isfinite(s.p.x) || !std::isfinite(s.p.y) || !bbox.contains(s.p))
      throw Error(ErrorKind::SiteOutsideBox, "site (" + std::to_string(s.p.x) + ", " + std::to_string(s.p.y) +
                                                 ") outside bounding box");
  }
  const auto sites = merge_duplicates(input);
  const SiteGrid grid(sites, bbox);

  Tessellation t;
  t.bbox = bbox;
  t.projection = projection;
  t.cells.reserve(sites.size());
  const std::vector<PlanarPoint> box_ring{
      {bbox.min_x, bbox.min_y}, {bbox.max_x, bbox.min_y}, {bbox.max_x, bbox.max_y}, {bbox.min_x, bbox.max_y}};

  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto p = sites[i].p;
    auto ring = box_ring;
    const auto [c, r] = grid.cell_of(p);
    for (std::size_t k = 0; k <= grid.max_ring(); ++k) {
      grid.for_ring(c, r, k, [&](std::size_t j) {
        if (j != i && !ring.empty()) ring = clip_to_bisector(ring, p, sites[j].p);
      });
      // Sites beyond ring k are at least k cells away; their bisectors cannot
      // reach the cell once that exceeds twice its farthest vertex distance.
      double reach = 0.0;
      for (const auto& v : ring) reach = std::max(reach, std::hypot(v.x - p.x, v.y - p.y));
      if (static_cast<double>(k) * grid.cell_size() > 2.0 * reach) break;
    }
    t.cells.push_back({sites[i], std::move(ring), kMissing});
  }
  return t;
}

std::vector<Site> sites_from_table(const FusedFrameTable& table, const std::string& value_source,
                                   const LocalProjection& projection) {
  const bool use_label = value_source == "label";
  std::vector<double> values;
  if (!use_label) values = table.column(value_source);

  // Group on positions rounded to 1e-7 degrees.
  std::map<std::pair<long long, long long>, std::pair<double, std::size_t>> groups;
  std::vector<std::pair<long long, long long>> order;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (is_missing(table.lat[r]) || is_missing(table.lon[r])) continue;
    double v = 0.0;
    if (use_label) {
      if (!table.labels[r]) continue;
      v = *table.labels[r];
    } else {
      v = values[r];
      if (is_missing(v)) continue;
    }
    const auto key = std::make_pair(std::llround(table.lat[r] * 1e7), std::llround(table.lon[r] * 1e7));
    auto [it, inserted] = groups.try_emplace(key, 0.0, 0);
    if (inserted) order.push_back(key);
    it->second.first += v;
    it->second.second += 1;
  }
  std::vector<Site> sites;
  for (const auto& key : order) {
    const auto& [sum, count] = groups[key];
    sites.push_back({projection.forward(static_cast<double>(key.first) * 1e-7, static_cast<double>(key.second) * 1e-7),
                     sum / static_cast<double>(count)});
  }
  return sites;
}

BoundingBox bbox_around(std::span<const Site> sites, double padding) {
  if (sites.empty()) throw Error(ErrorKind::NoSites, "no sites");
  BoundingBox b{sites.front().p.x, sites.front().p.y, sites.front().p.x, sites.front().p.y};
  for (const auto& s : sites) {
    b.min_x = std::min(b.min_x, s.p.x);
    b.min_y = std::min(b.min_y, s.p.y);
    b.max_x = std::max(b.max_x, s.p.x);
    b.max_y = std::max(b.max_y, s.p.y);
  }
  padding = std::max(padding, 1e-6);
  b.min_x -= padding;
  b.min_y -= padding;
  b.max_x += padding;
  b.max_y += padding;
  return b;
}

Tessellation classify_cells(Tessellation t, std::span<const double> thresholds) {
  if (!std::is_sorted(thresholds.begin(), thresholds.end()))
    throw Error(ErrorKind::UnsortedBins, "class thresholds must be ascending");
  for (auto& cell : t.cells) {
    const auto bin = std::upper_bound(thresholds.begin(), thresholds.end(), cell.site.value) - thresholds.begin();
    cell.class_value = static_cast<double>(bin);
  }
  return t;
}

HeatGrid grid_heatmap(const FusedFrameTable& table, const std::string& channel, double cell_size) {
  if (!(cell_size > 0.0)) throw Error(ErrorKind::InvalidConfig, "cell_size must be > 0");
  const auto column = table.column(channel);
  HeatGrid grid;
  grid.cell_size = cell_size;
  grid.projection = LocalProjection::centered_on(table);

  std::vector<std::pair<PlanarPoint, double>> points;
  for (std::size_t r = 0; r < table.rows(); ++r) {
    if (is_missing(table.lat[r]) || is_missing(table.lon[r]) || is_missing(column[r])) continue;
    points.emplace_back(grid.projection.forward(table.lat[r], table.lon[r]), column[r]);
  }
  if (points.empty()) throw Error(ErrorKind::NoGeoRows, "no row has both a position and a '" + channel + "' value");

  double max_x = points.front().first.x, max_y = points.front().first.y;
  grid.origin = points.front().first;
  for (const auto& [p, v] : points) {
    grid.origin.x = std::min(grid.origin.x, p.x);
    grid.origin.y = std::min(grid.origin.y, p.y);
    max_x = std::max(max_x, p.x);
    max_y = std::max(max_y, p.y);
  }
  grid.cols = static_cast<std::size_t>(std::floor((max_x - grid.origin.x) / cell_size)) + 1;
  grid.rows = static_cast<std::size_t>(std::floor((max_y - grid.origin.y) / cell_size)) + 1;
  grid.counts.assign(grid.rows * grid.cols, 0);
  Matrix sums(grid.rows, grid.cols);
  for (const auto& [p, v] : points) {
    const auto c = std::min(grid.cols - 1, static_cast<std::size_t>(std::floor((p.x - grid.origin.x) / cell_size)));
    const auto r = std::min(grid.rows - 1, static_cast<std::size_t>(std::floor((p.y - grid.origin.y) / cell_size)));
    sums(r, c) += v;
    grid.counts[r * grid.cols + c] += 1;
  }
  grid.values = Matrix(grid.rows, grid.cols, kMissing);
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c)
      if (auto n = grid.count(r, c); n > 0) grid.values(r, c) = sums(r, c) / static_cast<double>(n);
  return grid;
}

// ---------------------------------------------------------------------------

std::string export_geojson(const Tessellation& t) {
  nlohmann::ordered_json fc;
  fc["type"] = "FeatureCollection";
  fc["features"] = nlohmann::ordered_json::array();
  for (const auto& cell : t.cells) {
    nlohmann::ordered_json ring = nlohmann::ordered_json::array();
    auto push = [&](PlanarPoint p) {
      const auto [lat, lon] = t.projection.inverse(p);
      ring.push_back({lon, lat});
    };
    for (const auto& v : cell.polygon) push(v);
    if (!cell.polygon.empty()) push(cell.polygon.front());

    const auto [site_lat, site_lon] = t.projection.inverse(cell.site.p);
    nlohmann::ordered_json feature;
    feature["type"] = "Feature";
    feature["geometry"] = {{"type", "Polygon"}, {"coordinates", nlohmann::ordered_json::array({ring})}};
    feature["properties"] = {{"site_lon", site_lon},
                             {"site_lat", site_lat},
                             {"value", cell.site.value},
                             {"class_value", is_missing(cell.class_value) ? nlohmann::ordered_json(nullptr)
                                                                          : nlohmann::ordered_json(cell.class_value)}};
    fc["features"].push_back(std::move(feature));
  }
  return fc.dump() + "\n";
}

std::string heatgrid_csv(const HeatGrid& grid) {
  std::string out = "row,col,value,count\n";
  for (std::size_t r = 0; r < grid.rows; ++r)
    for (std::size_t c = 0; c < grid.cols; ++c)
      if (auto n = grid.count(r, c); n > 0)
        out += std::to_string(r) + ',' + std::to_string(c) + ',' + detail::format_double(grid.values(r, c)) + ',' +
               std::to_string(n) + '\n';
  return out;
}

std::string export_svg(const Tessellation& t) {
  // Red (low valence / high class 0) through green.
  static constexpr const char* kPalette[5] = {"#d7191c", "#fdae61", "#ffffbf", "#a6d96a", "#1a9641"};
  const double canvas = 1000.0;
  const double scale = canvas / std::max(t.bbox.width(), t.bbox.height());
  const double w = t.bbox.width() * scale;
  const double h = t.bbox.height() * scale;
  char buf[128];
  std::string out;
  std::snprintf(buf, sizeof buf, "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n",
                std::ceil(w), std::ceil(h));
  out += buf;
  for (const auto& cell : t.cells) {
    const char* fill = "#bdbdbd";
    if (!is_missing(cell.class_value)) {
      const auto k = static_cast<std::size_t>(std::clamp(cell.class_value, 0.0, 4.0));
      fill = kPalette[k];
    }
    out += "<polygon points=\"";
    for (std::size_t i = 0; i < cell.polygon.size(); ++i) {
      const auto& v = cell.polygon[i];
      std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", i ? " " : "", (v.x - t.bbox.min_x) * scale,
                    h - (v.y - t.bbox.min_y) * scale);
      out += buf;
    }
    out += "\" fill=\"";
    out += fill;
    out += "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace exposome
