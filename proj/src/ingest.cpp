#include "exposome/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "exposome/error.hpp"
#include "text_io.hpp"

namespace exposome {

using detail::format_double;
using detail::parse_double;
using detail::parse_int;

std::string_view to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Environment: return "environment";
    case ChannelKind::Physiology: return "physiology";
    case ChannelKind::Motion: return "motion";
    case ChannelKind::Context: return "context";
    case ChannelKind::Label: return "label";
  }
  return "environment";
}

ChannelKind channel_kind_from_string(std::string_view name) {
  if (name == "environment") return ChannelKind::Environment;
  if (name == "physiology") return ChannelKind::Physiology;
  if (name == "motion") return ChannelKind::Motion;
  if (name == "context") return ChannelKind::Context;
  if (name == "label") return ChannelKind::Label;
  throw Error(ErrorKind::InvalidConfig, "unknown channel kind '" + std::string(name) + "'");
}

namespace {

// Yields the data rows of a CSV document after checking its header.
std::vector<std::vector<std::string_view>> csv_rows(std::string_view csv, std::string_view header,
                                                    std::size_t width) {
  auto all = detail::lines(csv);
  if (all.empty() || all.front() != header)
    throw Error(ErrorKind::MalformedRow, "expected header '" + std::string(header) + "'");
  std::vector<std::vector<std::string_view>> rows;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].empty()) continue;
    auto cells = detail::split(all[i], ',');
    if (cells.size() != width)
      throw Error(ErrorKind::MalformedRow, "line " + std::to_string(i + 1) + ": expected " +
                                               std::to_string(width) + " cells");
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::int64_t parse_time(std::string_view cell, std::size_t row) {
  auto t = parse_int(cell);
  if (!t || *t < 0)
    throw Error(ErrorKind::MalformedRow, "row " + std::to_string(row) + ": bad t_ms '" +
                                             std::string(cell) + "'");
  return *t;
}

void require_increasing(std::int64_t prev, std::int64_t t, std::size_t row) {
  if (t <= prev)
    throw Error(ErrorKind::NonMonotonicTime, "row " + std::to_string(row) + ": t_ms " +
                                                 std::to_string(t) + " after " + std::to_string(prev));
}

}  // namespace

RawStream parse_stream(std::string_view csv, const ChannelSpec& spec) {
  if (!(spec.native_period_s > 0.0))
    throw Error(ErrorKind::InvalidConfig, "channel '" + spec.name + "' needs native_period > 0");
  RawStream stream{spec, {}};
  const auto rows = csv_rows(csv, "t_ms,value", 2);
  stream.samples.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto t = parse_time(rows[i][0], i + 1);
    if (!stream.samples.empty()) require_increasing(stream.samples.back().t_ms, t, i + 1);
    double value = kMissing;
    if (!rows[i][1].empty()) {
      auto v = parse_double(rows[i][1]);
      if (!v)
        throw Error(ErrorKind::MalformedRow, "row " + std::to_string(i + 1) + ": bad value '" +
                                                 std::string(rows[i][1]) + "'");
      value = *v;
    }
    stream.samples.push_back({t, value});
  }
  return stream;
}

std::string serialize_stream(const RawStream& stream) {
  std::string out = "t_ms,value\n";
  for (const auto& s : stream.samples) {
    out += std::to_string(s.t_ms);
    out += ',';
    out += format_double(s.value);
    out += '\n';
  }
  return out;
}

GeoTrace parse_geo(std::string_view csv) {
  GeoTrace geo;
  const auto rows = csv_rows(csv, "t_ms,lat,lon", 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto t = parse_time(rows[i][0], i + 1);
    if (!geo.points.empty()) require_increasing(geo.points.back().t_ms, t, i + 1);
    auto lat = parse_double(rows[i][1]);
    auto lon = parse_double(rows[i][2]);
    if (!lat || !lon || std::fabs(*lat) > 90.0 || std::fabs(*lon) > 180.0)
      throw Error(ErrorKind::MalformedRow, "row " + std::to_string(i + 1) + ": bad coordinate");
    geo.points.push_back({t, *lat, *lon});
  }
  return geo;
}

std::string serialize_geo(const GeoTrace& geo) {
  std::string out = "t_ms,lat,lon\n";
  for (const auto& p : geo.points)
    out += std::to_string(p.t_ms) + ',' + format_double(p.lat) + ',' + format_double(p.lon) + '\n';
  return out;
}

std::vector<LabelEvent> parse_labels(std::string_view csv) {
  std::vector<LabelEvent> labels;
  const auto rows = csv_rows(csv, "t_ms,valence", 2);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto t = parse_time(rows[i][0], i + 1);
    if (!labels.empty()) require_increasing(labels.back().t_ms, t, i + 1);
    auto v = parse_int(rows[i][1]);
    if (!v || *v < 1 || *v > 5)
      throw Error(ErrorKind::MalformedRow, "row " + std::to_string(i + 1) + ": valence must be 1..5");
    labels.push_back({t, static_cast<int>(*v)});
  }
  return labels;
}

std::string serialize_labels(const std::vector<LabelEvent>& labels) {
  std::string out = "t_ms,valence\n";
  for (const auto& l : labels) out += std::to_string(l.t_ms) + ',' + std::to_string(l.valence) + '\n';
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> ValidationReport::constant_channels() const {
  std::vector<std::string> names;
  for (const auto& c : channels)
    if (c.constant) names.push_back(c.name);
  return names;
}

ValidationReport validate_bundle(const SessionBundle& bundle) {
  ValidationReport report;
  bool any_empty = bundle.streams.empty();
  std::int64_t latest_start = 0;
  std::int64_t earliest_end = 0;
  bool first = true;
  for (const auto& stream : bundle.streams) {
    ChannelReport ch;
    ch.name = stream.channel.name;
    ch.sample_count = stream.samples.size();
    if (stream.samples.empty()) {
      any_empty = true;
      report.channels.push_back(std::move(ch));
      continue;
    }
    ch.start_ms = stream.samples.front().t_ms;
    ch.end_ms = stream.samples.back().t_ms;
    ch.coverage_s = static_cast<double>(*ch.end_ms - *ch.start_ms) / 1000.0;

    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::size_t present = 0;
    for (const auto& s : stream.samples) {
      if (is_missing(s.value)) continue;
      lo = std::min(lo, s.value);
      hi = std::max(hi, s.value);
      ++present;
    }
    ch.constant = present >= kConstantMinSamples && (hi - lo) < kConstantTolerance;

    latest_start = first ? *ch.start_ms : std::max(latest_start, *ch.start_ms);
    earliest_end = first ? *ch.end_ms : std::min(earliest_end, *ch.end_ms);
    first = false;
    report.channels.push_back(std::move(ch));
  }
  if (!any_empty && latest_start <= earliest_end) report.overlap_ms = {latest_start, earliest_end};
  return report;
}

// ---------------------------------------------------------------------------

SynthConfig SynthConfig::defaults() {
  SynthConfig cfg;
  cfg.waypoints = {{52.95360, -1.15050}, {52.95600, -1.15400}, {52.95800, -1.15000},
                   {52.95550, -1.14600}, {52.95360, -1.15050}};

  auto env = [](std::string name, std::string unit, double baseline, double scale, double loading) {
    SynthEnvChannel c;
    c.spec = {std::move(name), std::move(unit), 20.0, ChannelKind::Environment};
    c.baseline = baseline;
    c.scale = scale;
    c.loading = loading;
    c.noise_sd = 0.2;
    return c;
  };
  cfg.environment = {
      env("PM1", "ug/m3", 6.0, 2.0, 0.95),     env("PM2.5", "ug/m3", 10.0, 3.0, 1.0),
      env("PM10", "ug/m3", 15.0, 4.0, 0.9),    env("Oxidised", "kOhm", 20.0, 5.0, 0.5),
      env("Reduced", "kOhm", 300.0, 40.0, -0.4), env("NH3", "kOhm", 80.0, 10.0, 0.6),
      env("Noise", "dB", 60.0, 6.0, 0.3),
  };

  auto physio = [](std::string name, std::string unit, double period, double baseline, double scale,
                   std::map<std::string, double> coupling, double arousal, double noise,
                   double label_weight) {
    SynthPhysioChannel c;
    c.spec = {std::move(name), std::move(unit), period, ChannelKind::Physiology};
    c.baseline = baseline;
    c.scale = scale;
    c.env_coupling = std::move(coupling);
    c.arousal_loading = arousal;
    c.noise_sd = noise;
    c.label_weight = label_weight;
    return c;
  };
  constexpr double k64Hz = 1.0 / 64.0;
  cfg.physiology = {
      physio("EDA", "uS", k64Hz, 2.0, 0.5, {{"PM2.5", 0.9}}, 0.3, 0.5, -1.0),
      physio("HR", "bpm", 1.0, 80.0, 8.0, {{"PM10", 0.5}}, 0.6, 0.15, -0.6),
      physio("HRV", "ms", k64Hz, 50.0, 10.0, {{"PM1", -0.5}}, -0.4, 0.5, 0.5),
      physio("BVP", "au", k64Hz, 0.0, 30.0, {{"NH3", 0.3}}, 0.3, 0.8, 0.0),
      physio("TEMP", "degC", k64Hz, 33.0, 0.5, {{"Noise", 0.3}}, 0.2, 0.5, 0.0),
  };

  SynthNoiseChannel accel;
  accel.spec = {"ACC", "g", 1.0 / 32.0, ChannelKind::Motion};
  accel.baseline = 1.0;
  accel.sd = 0.15;
  accel.non_negative = true;
  SynthNoiseChannel people;
  people.spec = {"PEOPLE", "count", 20.0, ChannelKind::Context};
  people.baseline = 6.0;
  people.sd = 3.0;
  people.round_to_integer = true;
  people.non_negative = true;
  cfg.noise_channels = {accel, people};
  return cfg;
}

namespace {

void check_config(const SynthConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::InvalidConfig, msg); };
  if (!(cfg.duration_s > 0.0)) fail("duration_s must be > 0");
  if (cfg.waypoints.size() < 2) fail("at least 2 waypoints required");
  if (!(cfg.geo_period_s >= 1e-3)) fail("geo_period_s must be >= 1 ms");
  if (!(cfg.label_period_s >= 1e-3)) fail("label_period_s must be >= 1 ms");
  if (!(cfg.latent_timescale_s > 0.0)) fail("latent_timescale_s must be > 0");
  if (!std::is_sorted(cfg.label_thresholds.begin(), cfg.label_thresholds.end()) ||
      cfg.label_thresholds.size() != 4)
    fail("label_thresholds must be 4 ascending cut points");
  std::vector<std::string> names;
  auto check_spec = [&](const ChannelSpec& spec) {
    if (!(spec.native_period_s >= 1e-3)) fail("channel '" + spec.name + "' needs native_period >= 1 ms");
    names.push_back(spec.name);
  };
  for (const auto& c : cfg.environment) check_spec(c.spec);
  for (const auto& c : cfg.physiology) check_spec(c.spec);
  for (const auto& c : cfg.noise_channels) check_spec(c.spec);
  for (const auto& c : cfg.constant_channels) check_spec(c.spec);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) fail("duplicate channel name");
  for (const auto& p : cfg.physiology)
    for (const auto& [env_name, w] : p.env_coupling) {
      (void)w;
      const bool known = std::any_of(cfg.environment.begin(), cfg.environment.end(),
                                     [&](const auto& e) { return e.spec.name == env_name; });
      if (!known) fail("physiology channel '" + p.spec.name + "' couples to unknown '" + env_name + "'");
    }
}

// Sample instants k * period (ms, floored) up to the session end.
std::vector<std::int64_t> sample_times(double period_s, double duration_s) {
  std::vector<std::int64_t> times;
  const double period_ms = period_s * 1000.0;
  const double end_ms = duration_s * 1000.0;
  for (std::int64_t k = 0;; ++k) {
    const double t = static_cast<double>(k) * period_ms;
    if (t > end_ms + 1e-9) break;
    times.push_back(static_cast<std::int64_t>(std::floor(t + 1e-9)));
  }
  return times;
}

// Unit-variance Ornstein-Uhlenbeck path sampled once per second.
std::vector<double> ou_path(std::size_t n, double timescale_s, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double phi = std::exp(-1.0 / timescale_s);
  const double innovation = std::sqrt(1.0 - phi * phi);
  std::vector<double> path(n);
  path[0] = normal(rng);
  for (std::size_t i = 1; i < n; ++i) path[i] = phi * path[i - 1] + innovation * normal(rng);
  return path;
}

double at_time(const std::vector<double>& per_second, std::int64_t t_ms) {
  const double t = static_cast<double>(t_ms) / 1000.0;
  const auto i = static_cast<std::size_t>(std::floor(t));
  if (i + 1 >= per_second.size()) return per_second.back();
  const double u = t - static_cast<double>(i);
  return per_second[i] + u * (per_second[i + 1] - per_second[i]);
}

GeoTrace walk_route(const SynthConfig& cfg) {
  const double lat0 = cfg.waypoints.front().first * std::numbers::pi / 180.0;
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 1; i < cfg.waypoints.size(); ++i) {
    const double dy = cfg.waypoints[i].first - cfg.waypoints[i - 1].first;
    const double dx = (cfg.waypoints[i].second - cfg.waypoints[i - 1].second) * std::cos(lat0);
    cumulative.push_back(cumulative.back() + std::hypot(dx, dy));
  }
  const double total = cumulative.back();
  GeoTrace geo;
  for (auto t : sample_times(cfg.geo_period_s, cfg.duration_s)) {
    const double s = total * std::min(1.0, static_cast<double>(t) / (cfg.duration_s * 1000.0));
    auto seg = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), s) - cumulative.begin());
    seg = std::clamp<std::size_t>(seg, 1, cumulative.size() - 1);
    const double len = cumulative[seg] - cumulative[seg - 1];
    const double u = len > 0.0 ? (s - cumulative[seg - 1]) / len : 0.0;
    const auto& a = cfg.waypoints[seg - 1];
    const auto& b = cfg.waypoints[seg];
    geo.points.push_back({t, a.first + u * (b.first - a.first), a.second + u * (b.second - a.second)});
  }
  return geo;
}

}  // namespace

SyntheticSession generate_synthetic_session(const SynthConfig& cfg, std::uint64_t seed) {
  check_config(cfg);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SyntheticSession out;
  auto& bundle = out.bundle;
  auto& truth = out.truth;
  bundle.participant_id = cfg.participant_id;

  const auto seconds = static_cast<std::size_t>(std::floor(cfg.duration_s)) + 2;
  truth.latent_pollution = ou_path(seconds, cfg.latent_timescale_s, rng);
  truth.latent_arousal = ou_path(seconds, cfg.latent_timescale_s, rng);

  // Noise-free environment signal, in standardized units.
  auto env_signal = [&](const SynthEnvChannel& c, std::int64_t t) {
    return c.loading * at_time(truth.latent_pollution, t);
  };
  auto physio_signal = [&](const SynthPhysioChannel& c, std::int64_t t) {
    double s = c.arousal_loading * at_time(truth.latent_arousal, t);
    for (const auto& [name, w] : c.env_coupling) {
      const auto& env = *std::find_if(cfg.environment.begin(), cfg.environment.end(),
                                      [&](const auto& e) { return e.spec.name == name; });
      s += w * env_signal(env, t);
    }
    return s;
  };

  for (const auto& c : cfg.environment) {
    RawStream stream{c.spec, {}};
    for (auto t : sample_times(c.spec.native_period_s, cfg.duration_s))
      stream.samples.push_back({t, c.baseline + c.scale * (env_signal(c, t) + c.noise_sd * normal(rng))});
    bundle.streams.push_back(std::move(stream));
  }
  for (const auto& c : cfg.physiology) {
    RawStream stream{c.spec, {}};
    for (auto t : sample_times(c.spec.native_period_s, cfg.duration_s))
      stream.samples.push_back(
          {t, c.baseline + c.scale * (physio_signal(c, t) + c.noise_sd * normal(rng))});
    bundle.streams.push_back(std::move(stream));
  }
  for (const auto& c : cfg.noise_channels) {
    RawStream stream{c.spec, {}};
    for (auto t : sample_times(c.spec.native_period_s, cfg.duration_s)) {
      double v = c.baseline + c.sd * normal(rng);
      if (c.round_to_integer) v = std::round(v);
      if (c.non_negative) v = std::max(0.0, v);
      stream.samples.push_back({t, v});
    }
    bundle.streams.push_back(std::move(stream));
  }
  for (const auto& c : cfg.constant_channels) {
    RawStream stream{c.spec, {}};
    for (auto t : sample_times(c.spec.native_period_s, cfg.duration_s)) stream.samples.push_back({t, c.value});
    bundle.streams.push_back(std::move(stream));
  }

  bundle.geo = walk_route(cfg);

  // Wellbeing score: weighted noise-free signals plus report noise,
  // standardized over the session, then cut into valence 1..5.
  truth.label_times_ms = sample_times(cfg.label_period_s, cfg.duration_s);
  std::vector<double> raw;
  for (auto t : truth.label_times_ms) {
    double w = cfg.label_noise_sd * normal(rng);
    for (const auto& c : cfg.environment) w += c.label_weight * env_signal(c, t);
    for (const auto& c : cfg.physiology) w += c.label_weight * physio_signal(c, t);
    raw.push_back(w);
  }
  double mean = 0.0;
  for (double w : raw) mean += w;
  mean /= static_cast<double>(raw.size());
  double var = 0.0;
  for (double w : raw) var += (w - mean) * (w - mean);
  const double sd = raw.size() > 1 ? std::sqrt(var / static_cast<double>(raw.size() - 1)) : 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double z = sd > 0.0 ? (raw[i] - mean) / sd : 0.0;
    truth.wellbeing_scores.push_back(z);
    const auto bin = std::upper_bound(cfg.label_thresholds.begin(), cfg.label_thresholds.end(), z) -
                     cfg.label_thresholds.begin();
    if (cfg.emit_labels) bundle.labels.push_back({truth.label_times_ms[i], static_cast<int>(bin) + 1});
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {
std::string file_stem_for(const std::string& name) {
  std::string out;
  for (char c : name) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}
}  // namespace

SessionBundle load_session(const std::filesystem::path& manifest_path) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(detail::read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, "manifest " + manifest_path.string() + ": " + e.what());
  }
  const auto base = manifest_path.parent_path();
  SessionBundle bundle;
  try {
    bundle.participant_id = manifest.at("participant_id").get<std::string>();
    for (const auto& ch : manifest.at("channels")) {
      ChannelSpec spec{ch.at("name").get<std::string>(), ch.value("unit", std::string{}),
                       ch.at("native_period_s").get<double>(),
                       channel_kind_from_string(ch.at("kind").get<std::string>())};
      bundle.streams.push_back(parse_stream(detail::read_file(base / ch.at("path").get<std::string>()), spec));
    }
    if (manifest.contains("geo")) bundle.geo = parse_geo(detail::read_file(base / manifest["geo"].get<std::string>()));
    if (manifest.contains("labels") && !manifest["labels"].is_null())
      bundle.labels = parse_labels(detail::read_file(base / manifest["labels"].get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, "manifest " + manifest_path.string() + ": " + e.what());
  }
  std::vector<std::string> names;
  for (const auto& s : bundle.streams) names.push_back(s.channel.name);
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end())
    throw Error(ErrorKind::InvalidConfig, "duplicate channel name in manifest");
  return bundle;
}

std::filesystem::path write_session(const SessionBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["participant_id"] = bundle.participant_id;
  manifest["channels"] = nlohmann::ordered_json::array();
  for (const auto& s : bundle.streams) {
    const auto file = "channel_" + file_stem_for(s.channel.name) + ".csv";
    detail::write_file(dir / file, serialize_stream(s));
    manifest["channels"].push_back({{"name", s.channel.name},
                                    {"unit", s.channel.unit},
                                    {"native_period_s", s.channel.native_period_s},
                                    {"kind", to_string(s.channel.kind)},
                                    {"path", file}});
  }
  detail::write_file(dir / "geo.csv", serialize_geo(bundle.geo));
  manifest["geo"] = "geo.csv";
  if (bundle.labeled()) {
    detail::write_file(dir / "labels.csv", serialize_labels(bundle.labels));
    manifest["labels"] = "labels.csv";
  }
  const auto path = dir / "manifest.json";
  detail::write_file(path, manifest.dump(2) + "\n");
  return path;
}

}  // namespace exposome
