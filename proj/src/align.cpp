#include "exposome/align.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "exposome/error.hpp"
#include "text_io.hpp"

namespace exposome {

double interpolate_linear(const InterpolationPoint& p, double x) {
  if (p.x1 == p.x2) throw Error(ErrorKind::DegenerateInterval, "x1 == x2");
  return p.y1 + (x - p.x1) * (p.y2 - p.y1) / (p.x2 - p.x1);
}

namespace {

constexpr std::int64_t kMsPerSecond = 1000;

std::int64_t floor_second(std::int64_t t_ms) {
  return t_ms >= 0 ? t_ms / kMsPerSecond : -((-t_ms + kMsPerSecond - 1) / kMsPerSecond);
}
std::int64_t ceil_second(std::int64_t t_ms) { return -floor_second(-t_ms); }

}  // namespace

RawStream resample(const RawStream& stream) {
  std::vector<RawSample> present;
  present.reserve(stream.samples.size());
  for (const auto& s : stream.samples)
    if (!is_missing(s.value)) present.push_back(s);
  if (present.empty()) throw Error(ErrorKind::EmptyStream, "channel '" + stream.channel.name + "' has no samples");

  RawStream out{stream.channel, {}};
  out.channel.native_period_s = 1.0;

  if (stream.channel.native_period_s < 1.0) {
    // Window means over [k, k+1) s.
    std::size_t i = 0;
    while (i < present.size()) {
      const auto second = floor_second(present[i].t_ms);
      double sum = 0.0;
      std::size_t count = 0;
      while (i < present.size() && floor_second(present[i].t_ms) == second) {
        sum += present[i].value;
        ++count;
        ++i;
      }
      out.samples.push_back({second * kMsPerSecond, sum / static_cast<double>(count)});
    }
    return out;
  }

  const auto first = ceil_second(present.front().t_ms);
  const auto last = floor_second(present.back().t_ms);
  std::size_t i = 0;
  for (auto k = first; k <= last; ++k) {
    const auto t = k * kMsPerSecond;
    while (i + 1 < present.size() && present[i + 1].t_ms <= t) ++i;
    if (present[i].t_ms == t) {
      out.samples.push_back({t, present[i].value});
      continue;
    }
    const auto& a = present[i];
    const auto& b = present[i + 1];
    const InterpolationPoint p{static_cast<double>(a.t_ms), a.value, static_cast<double>(b.t_ms), b.value};
    out.samples.push_back({t, interpolate_linear(p, static_cast<double>(t))});
  }
  return out;
}

std::vector<double> normalize(std::span<const double> column) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : column) {
    if (is_missing(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(hi > lo)) throw Error(ErrorKind::ConstantColumn, "column has max == min");
  const double range = hi - lo;
  std::vector<double> out(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) {
    const double v = column[i];
    if (is_missing(v)) {
      out[i] = kMissing;
    } else if (v == hi) {
      out[i] = 1.0;  // exact, so normalization is idempotent
    } else {
      out[i] = (v - lo) / range;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::optional<std::size_t> FusedFrameTable::index_of(std::string_view channel) const {
  for (std::size_t i = 0; i < channels.size(); ++i)
    if (channels[i].name == channel) return i;
  return std::nullopt;
}

std::size_t FusedFrameTable::require_index(std::string_view channel) const {
  auto idx = index_of(channel);
  if (!idx) throw Error(ErrorKind::InsufficientData, "no channel '" + std::string(channel) + "' in table");
  return *idx;
}

std::vector<double> FusedFrameTable::column(std::string_view channel) const {
  return values.column(require_index(channel));
}

std::vector<std::string> FusedFrameTable::channel_names() const {
  std::vector<std::string> names;
  for (const auto& c : channels) names.push_back(c.name);
  return names;
}

std::vector<std::string> FusedFrameTable::channel_names(ChannelKind kind) const {
  std::vector<std::string> names;
  for (const auto& c : channels)
    if (c.kind == kind) names.push_back(c.name);
  return names;
}

namespace {

struct GridColumn {
  ChannelSpec spec;
  std::int64_t first_second = 0;
  std::vector<double> values;  // dense from first_second, kMissing in gaps

  std::int64_t last_second() const { return first_second + static_cast<std::int64_t>(values.size()) - 1; }
  double at(std::int64_t second) const {
    if (second < first_second || second > last_second()) return kMissing;
    return values[static_cast<std::size_t>(second - first_second)];
  }
};

GridColumn to_grid(const RawStream& resampled) {
  GridColumn col{resampled.channel, resampled.samples.front().t_ms / kMsPerSecond, {}};
  const auto last = resampled.samples.back().t_ms / kMsPerSecond;
  col.values.assign(static_cast<std::size_t>(last - col.first_second + 1), kMissing);
  for (const auto& s : resampled.samples)
    col.values[static_cast<std::size_t>(s.t_ms / kMsPerSecond - col.first_second)] = s.value;
  return col;
}

std::pair<double, double> geo_at(const GeoTrace& geo, std::size_t& cursor, std::int64_t t_ms) {
  const auto& pts = geo.points;
  if (pts.empty() || t_ms < pts.front().t_ms || t_ms > pts.back().t_ms) return {kMissing, kMissing};
  while (cursor + 1 < pts.size() && pts[cursor + 1].t_ms <= t_ms) ++cursor;
  const auto& a = pts[cursor];
  if (a.t_ms == t_ms || cursor + 1 == pts.size()) return {a.lat, a.lon};
  const auto& b = pts[cursor + 1];
  const double x1 = static_cast<double>(a.t_ms);
  const double x2 = static_cast<double>(b.t_ms);
  const double x = static_cast<double>(t_ms);
  return {interpolate_linear({x1, a.lat, x2, b.lat}, x), interpolate_linear({x1, a.lon, x2, b.lon}, x)};
}

}  // namespace

FusedFrameTable fuse(const SessionBundle& bundle) {
  FusedFrameTable table;
  const auto report = validate_bundle(bundle);

  std::vector<GridColumn> columns;
  for (std::size_t i = 0; i < bundle.streams.size(); ++i) {
    const auto& stream = bundle.streams[i];
    if (report.channels[i].constant) {
      table.excluded_channels.push_back(stream.channel.name);
      continue;
    }
    const bool has_values = std::any_of(stream.samples.begin(), stream.samples.end(),
                                        [](const RawSample& s) { return !is_missing(s.value); });
    if (!has_values) {
      table.excluded_channels.push_back(stream.channel.name);
      continue;
    }
    auto resampled = resample(stream);
    if (resampled.samples.empty()) {
      table.excluded_channels.push_back(stream.channel.name);
      continue;
    }
    columns.push_back(to_grid(resampled));
  }
  if (columns.empty()) throw Error(ErrorKind::AllChannelsConstant, "no usable channel in session");
  std::sort(columns.begin(), columns.end(),
            [](const GridColumn& a, const GridColumn& b) { return a.spec.name < b.spec.name; });

  std::int64_t start = columns.front().first_second;
  std::int64_t end = columns.front().last_second();
  for (const auto& c : columns) {
    start = std::max(start, c.first_second);
    end = std::min(end, c.last_second());
  }
  if (end - start < 2)
    throw Error(ErrorKind::NoOverlap, "channel spans overlap by less than 2 s");

  // Normalize each channel over the overlap window; a column that is
  // constant there carries no information and is dropped.
  std::vector<std::vector<double>> normalized;
  for (const auto& c : columns) {
    std::vector<double> window;
    window.reserve(static_cast<std::size_t>(end - start + 1));
    for (auto s = start; s <= end; ++s) window.push_back(c.at(s));
    try {
      auto scaled = normalize(window);
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (double v : window)
        if (!is_missing(v)) lo = std::min(lo, v), hi = std::max(hi, v);
      table.channels.push_back(c.spec);
      table.scaling.push_back({lo, hi});
      normalized.push_back(std::move(scaled));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ConstantColumn) throw;
      table.excluded_channels.push_back(c.spec.name);
    }
  }
  if (normalized.empty()) throw Error(ErrorKind::AllChannelsConstant, "every channel is constant in the overlap");
  std::sort(table.excluded_channels.begin(), table.excluded_channels.end());

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < static_cast<std::size_t>(end - start + 1); ++r) {
    const bool any = std::any_of(normalized.begin(), normalized.end(),
                                 [&](const auto& col) { return !is_missing(col[r]); });
    if (any) keep.push_back(r);
  }

  table.values = Matrix(keep.size(), normalized.size());
  std::size_t geo_cursor = 0;
  std::size_t label_cursor = 0;
  const auto& labels = bundle.labels;
  for (std::size_t i = 0; i < keep.size(); ++i) {
    const auto second = start + static_cast<std::int64_t>(keep[i]);
    const auto t_ms = second * kMsPerSecond;
    table.times_s.push_back(second);
    for (std::size_t c = 0; c < normalized.size(); ++c) table.values(i, c) = normalized[c][keep[i]];
    const auto [lat, lon] = geo_at(bundle.geo, geo_cursor, t_ms);
    table.lat.push_back(lat);
    table.lon.push_back(lon);
    // Last observation carried forward.
    while (label_cursor < labels.size() && labels[label_cursor].t_ms <= t_ms) ++label_cursor;
    table.labels.push_back(label_cursor == 0 ? std::nullopt : std::optional<int>(labels[label_cursor - 1].valence));
  }
  return table;
}

// ---------------------------------------------------------------------------

std::string serialize_fused_csv(const FusedFrameTable& table) {
  using detail::format_double;
  std::string out = "t_s,lat,lon,label";
  for (const auto& c : table.channels) out += ',' + c.name;
  out += '\n';
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out += std::to_string(table.times_s[r]);
    out += ',' + format_double(table.lat[r]);
    out += ',' + format_double(table.lon[r]);
    out += ',';
    if (table.labels[r]) out += std::to_string(*table.labels[r]);
    for (std::size_t c = 0; c < table.channels.size(); ++c) out += ',' + format_double(table.values(r, c));
    out += '\n';
  }
  return out;
}

std::string serialize_fused_meta(const FusedFrameTable& table) {
  nlohmann::ordered_json meta;
  meta["channels"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < table.channels.size(); ++i) {
    const auto& c = table.channels[i];
    meta["channels"].push_back({{"name", c.name},
                                {"unit", c.unit},
                                {"kind", to_string(c.kind)},
                                {"min", table.scaling[i].min},
                                {"max", table.scaling[i].max}});
  }
  meta["excluded_channels"] = table.excluded_channels;
  meta["normalization"] = "per-session min-max";
  return meta.dump(2) + "\n";
}

FusedFrameTable parse_fused(std::string_view csv, std::string_view meta_text) {
  auto rows = detail::lines(csv);
  if (rows.empty()) throw Error(ErrorKind::MalformedRow, "empty fused table");
  const auto header = detail::split(rows.front(), ',');
  if (header.size() < 5 || header[0] != "t_s" || header[1] != "lat" || header[2] != "lon" || header[3] != "label")
    throw Error(ErrorKind::MalformedRow, "expected header t_s,lat,lon,label,<channels>");

  FusedFrameTable table;
  for (std::size_t i = 4; i < header.size(); ++i) {
    table.channels.push_back({std::string(header[i]), "", 1.0, ChannelKind::Environment});
    table.scaling.push_back({0.0, 1.0});
  }
  if (!meta_text.empty()) {
    const auto meta = nlohmann::json::parse(meta_text);
    std::map<std::string, nlohmann::json> by_name;
    for (const auto& c : meta.at("channels")) by_name[c.at("name").get<std::string>()] = c;
    for (std::size_t i = 0; i < table.channels.size(); ++i) {
      auto it = by_name.find(table.channels[i].name);
      if (it == by_name.end()) continue;
      table.channels[i].unit = it->second.value("unit", std::string{});
      table.channels[i].kind = channel_kind_from_string(it->second.at("kind").get<std::string>());
      table.scaling[i] = {it->second.value("min", 0.0), it->second.value("max", 1.0)};
    }
    if (meta.contains("excluded_channels"))
      table.excluded_channels = meta["excluded_channels"].get<std::vector<std::string>>();
  }

  const std::size_t width = header.size();
  std::vector<double> flat;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].empty()) continue;
    const auto cells = detail::split(rows[r], ',');
    if (cells.size() != width) throw Error(ErrorKind::MalformedRow, "row " + std::to_string(r) + ": wrong width");
    auto t = detail::parse_int(cells[0]);
    if (!t) throw Error(ErrorKind::MalformedRow, "row " + std::to_string(r) + ": bad t_s");
    if (!table.times_s.empty() && *t <= table.times_s.back())
      throw Error(ErrorKind::NonMonotonicTime, "row " + std::to_string(r));
    table.times_s.push_back(*t);
    auto cell_value = [&](std::string_view cell) {
      if (cell.empty()) return kMissing;
      auto v = detail::parse_double(cell);
      if (!v) throw Error(ErrorKind::MalformedRow, "row " + std::to_string(r) + ": bad cell '" + std::string(cell) + "'");
      return *v;
    };
    table.lat.push_back(cell_value(cells[1]));
    table.lon.push_back(cell_value(cells[2]));
    if (cells[3].empty()) {
      table.labels.push_back(std::nullopt);
    } else {
      auto l = detail::parse_int(cells[3]);
      if (!l || *l < 1 || *l > 5) throw Error(ErrorKind::MalformedRow, "row " + std::to_string(r) + ": bad label");
      table.labels.push_back(static_cast<int>(*l));
    }
    for (std::size_t c = 4; c < width; ++c) flat.push_back(cell_value(cells[c]));
  }
  table.values = Matrix(table.times_s.size(), width - 4);
  table.values.data() = std::move(flat);
  return table;
}

}  // namespace exposome
