#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "exposome/align.hpp"
#include "exposome/matrix.hpp"

namespace exposome {

struct PlanarPoint {
  double x = 0.0;  // meters east
  double y = 0.0;  // meters north

  friend bool operator==(const PlanarPoint&, const PlanarPoint&) = default;
};

/// Local equirectangular projection about a reference point.
struct LocalProjection {
  double lat0 = 0.0;
  double lon0 = 0.0;

  PlanarPoint forward(double lat, double lon) const;
  /// Returns (lat, lon).
  std::pair<double, double> inverse(PlanarPoint p) const;

  /// Centered on the mean position of the geo-complete rows.
  /// Throws NoGeoRows.
  static LocalProjection centered_on(const FusedFrameTable& table);
};

struct BoundingBox {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const noexcept { return max_x - min_x; }
  double height() const noexcept { return max_y - min_y; }
  double area() const noexcept { return width() * height(); }
  bool contains(PlanarPoint p) const noexcept {
    return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
  }
};

struct Site {
  PlanarPoint p;
  double value = 0.0;
};

struct VoronoiCell {
  Site site;
  /// Counterclockwise ring; the closing edge back to the first vertex is
  /// implicit.
  std::vector<PlanarPoint> polygon;
  double class_value = kMissing;
};

struct Tessellation {
  std::vector<VoronoiCell> cells;
  BoundingBox bbox;
  LocalProjection projection;
};

/// Signed shoelace area (positive for counterclockwise rings).
double polygon_area(std::span<const PlanarPoint> ring);
bool polygon_contains(std::span<const PlanarPoint> ring, PlanarPoint q, double eps = 1e-9);

/// Euclidean Voronoi cells clipped to `bbox`, built per site by clipping the
/// box against the perpendicular bisector of every nearby site. Sites at
/// identical coordinates are merged with their mean value.
/// Throws NoSites / SiteOutsideBox.
Tessellation voronoi(std::span<const Site> sites, const BoundingBox& bbox,
                     const LocalProjection& projection = {});

/// Geo-tagged rows as sites. `value_source` names a channel or is "label".
/// Positions repeated to 1e-7 degrees are merged (mean value).
std::vector<Site> sites_from_table(const FusedFrameTable& table, const std::string& value_source,
                                   const LocalProjection& projection);

/// Bounding box of the sites grown by `padding` meters on every side.
BoundingBox bbox_around(std::span<const Site> sites, double padding);

/// Bin index of each site value against ascending thresholds: below the
/// first -> 0, at or above the last -> thresholds.size().
/// Throws UnsortedBins.
Tessellation classify_cells(Tessellation t, std::span<const double> thresholds);

struct HeatGrid {
  double cell_size = 1.0;
  PlanarPoint origin;
  LocalProjection projection;
  std::size_t rows = 0;
  std::size_t cols = 0;
  Matrix values;                    // mean per cell, kMissing when empty
  std::vector<std::size_t> counts;  // row-major, rows x cols

  std::size_t count(std::size_t r, std::size_t c) const { return counts[r * cols + c]; }
};

/// Mean of `channel` per square cell over rows with a position and a value.
/// Throws NoGeoRows / InvalidConfig (cell_size <= 0).
HeatGrid grid_heatmap(const FusedFrameTable& table, const std::string& channel, double cell_size);

/// RFC 7946 FeatureCollection, one Polygon per cell in (lon, lat).
std::string export_geojson(const Tessellation& t);
/// `row,col,value,count` for populated cells.
std::string heatgrid_csv(const HeatGrid& grid);
/// One <polygon> per cell, filled from a 5-color class palette.
std::string export_svg(const Tessellation& t);

}  // namespace exposome
