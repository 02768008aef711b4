#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exposome/ingest.hpp"
#include "exposome/matrix.hpp"

namespace exposome {

/// The two known points of a straight-line interpolant.
struct InterpolationPoint {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 1.0;
  double y2 = 0.0;
};

/// y1 + (x - x1) * (y2 - y1) / (x2 - x1). Throws DegenerateInterval if x1 == x2.
double interpolate_linear(const InterpolationPoint& p, double x);

/// Resamples a stream onto the whole-second grid (timestamps k * 1000 ms).
///
/// Streams faster than 1 Hz are averaged over each [k, k+1) s window;
/// slower (or equal) streams are linearly interpolated between the
/// bracketing samples. Grid points outside the stream's span are not
/// emitted. Missing samples are dropped first. Throws EmptyStream.
RawStream resample(const RawStream& stream);

/// Min-max scaling to [0, 1]; missing entries stay missing.
/// Throws ConstantColumn when max == min (or no values are present).
std::vector<double> normalize(std::span<const double> column);

struct ChannelScaling {
  double min = 0.0;
  double max = 1.0;
};

/// The 1 Hz aligned, normalized matrix every analysis consumes.
struct FusedFrameTable {
  std::vector<std::int64_t> times_s;
  std::vector<ChannelSpec> channels;
  std::vector<ChannelScaling> scaling;  // per channel, pre-normalization range
  Matrix values;                        // rows x channels, kMissing for gaps
  std::vector<double> lat;              // kMissing where the geo trace has no fix
  std::vector<double> lon;
  std::vector<std::optional<int>> labels;
  std::vector<std::string> excluded_channels;

  std::size_t rows() const noexcept { return times_s.size(); }
  std::optional<std::size_t> index_of(std::string_view channel) const;
  /// Throws InsufficientData if the channel is absent.
  std::size_t require_index(std::string_view channel) const;
  std::vector<double> column(std::string_view channel) const;
  std::vector<std::string> channel_names() const;
  std::vector<std::string> channel_names(ChannelKind kind) const;
};

/// Resamples, windows, normalizes, and joins a session. Constant channels
/// are dropped and listed in `excluded_channels`.
/// Throws NoOverlap / AllChannelsConstant.
FusedFrameTable fuse(const SessionBundle& bundle);

// `t_s,lat,lon,label,<channel...>`; empty cells for missing values.
std::string serialize_fused_csv(const FusedFrameTable& table);
/// Sidecar carrying channel specs, scaling and exclusions.
std::string serialize_fused_meta(const FusedFrameTable& table);
/// `meta` may be empty, in which case channels default to environment kind.
FusedFrameTable parse_fused(std::string_view csv, std::string_view meta = {});

}  // namespace exposome
