#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace exposome {

enum class ChannelKind { Environment, Physiology, Motion, Context, Label };

std::string_view to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(std::string_view name);

struct ChannelSpec {
  std::string name;
  std::string unit;
  double native_period_s = 1.0;
  ChannelKind kind = ChannelKind::Environment;

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

/// Sentinel for a missing sample value (an empty CSV cell).
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return v != v; }

struct RawSample {
  std::int64_t t_ms = 0;
  double value = 0.0;
};

struct RawStream {
  ChannelSpec channel;
  std::vector<RawSample> samples;
};

struct GeoPoint {
  std::int64_t t_ms = 0;
  double lat = 0.0;
  double lon = 0.0;
};

struct GeoTrace {
  std::vector<GeoPoint> points;
};

struct LabelEvent {
  std::int64_t t_ms = 0;
  int valence = 3;
};

struct SessionBundle {
  std::string participant_id;
  std::vector<RawStream> streams;
  GeoTrace geo;
  std::vector<LabelEvent> labels;  // empty for an unlabeled session

  bool labeled() const noexcept { return !labels.empty(); }
};

// --- CSV -----------------------------------------------------------------

/// Parses a `t_ms,value` document. An empty value cell is kept as kMissing.
/// Throws MalformedRow / NonMonotonicTime.
RawStream parse_stream(std::string_view csv, const ChannelSpec& spec);
std::string serialize_stream(const RawStream& stream);

GeoTrace parse_geo(std::string_view csv);
std::string serialize_geo(const GeoTrace& geo);

std::vector<LabelEvent> parse_labels(std::string_view csv);
std::string serialize_labels(const std::vector<LabelEvent>& labels);

// --- validation ------------------------------------------------------------

inline constexpr double kConstantTolerance = 1e-9;
inline constexpr std::size_t kConstantMinSamples = 10;

struct ChannelReport {
  std::string name;
  std::size_t sample_count = 0;
  std::optional<std::int64_t> start_ms;
  std::optional<std::int64_t> end_ms;
  double coverage_s = 0.0;
  bool constant = false;
};

struct ValidationReport {
  std::vector<ChannelReport> channels;
  /// [latest stream start, earliest stream end]; empty when any stream is
  /// empty or the spans do not intersect.
  std::optional<std::pair<std::int64_t, std::int64_t>> overlap_ms;

  std::vector<std::string> constant_channels() const;
};

ValidationReport validate_bundle(const SessionBundle& bundle);

// --- synthetic sessions ----------------------------------------------------

struct SynthEnvChannel {
  ChannelSpec spec;
  double baseline = 0.0;
  double scale = 1.0;
  double loading = 1.0;     // weight on the latent pollution level
  double noise_sd = 0.2;    // white noise per sample, in signal units
  double label_weight = 0.0;
};

struct SynthPhysioChannel {
  ChannelSpec spec;
  double baseline = 0.0;
  double scale = 1.0;
  /// Row of the planted coupling matrix: environment channel name -> weight
  /// on that channel's noise-free signal.
  std::map<std::string, double> env_coupling;
  double arousal_loading = 0.0;  // weight on the independent arousal latent
  double noise_sd = 0.5;
  double label_weight = 0.0;
};

/// Channel carrying no planted structure (accelerometer, people count).
struct SynthNoiseChannel {
  ChannelSpec spec;
  double baseline = 0.0;
  double sd = 1.0;
  bool round_to_integer = false;
  bool non_negative = false;
};

struct SynthConstantChannel {
  ChannelSpec spec;
  double value = 0.0;
};

struct SynthConfig {
  std::string participant_id = "synthetic-01";
  double duration_s = 1500.0;
  std::vector<std::pair<double, double>> waypoints;  // (lat, lon)
  double geo_period_s = 1.0;
  double label_period_s = 15.0;
  double latent_timescale_s = 90.0;
  std::vector<SynthEnvChannel> environment;
  std::vector<SynthPhysioChannel> physiology;
  std::vector<SynthNoiseChannel> noise_channels;
  std::vector<SynthConstantChannel> constant_channels;
  double label_noise_sd = 0.1;
  /// Ascending cut points on the standardized wellbeing score; four cuts
  /// give valence 1..5.
  std::vector<double> label_thresholds{-0.8416, -0.2533, 0.2533, 0.8416};
  bool emit_labels = true;

  /// Fourteen-channel walk with strong pollution -> physiology -> label
  /// coupling. Device rates follow the wearable/edge setup: environment
  /// every 20 s, HR at 1 Hz, other physiology at 64 Hz.
  static SynthConfig defaults();
};

/// Planted quantities that produced a synthetic bundle.
struct SynthGroundTruth {
  std::vector<double> latent_pollution;  // per whole second, 0..duration
  std::vector<double> latent_arousal;
  std::vector<std::int64_t> label_times_ms;
  std::vector<double> wellbeing_scores;  // standardized, one per label
};

struct SyntheticSession {
  SessionBundle bundle;
  SynthGroundTruth truth;
};

/// Deterministic for fixed (cfg, seed). Throws InvalidConfig.
SyntheticSession generate_synthetic_session(const SynthConfig& cfg, std::uint64_t seed);

// --- manifests -------------------------------------------------------------

/// Reads a session manifest JSON and every file it references (paths are
/// relative to the manifest's directory).
SessionBundle load_session(const std::filesystem::path& manifest_path);

/// Writes one CSV per stream plus geo/labels CSVs and `manifest.json` into
/// `dir`; returns the manifest path.
std::filesystem::path write_session(const SessionBundle& bundle, const std::filesystem::path& dir);

}  // namespace exposome
