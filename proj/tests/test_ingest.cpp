#include <cmath>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "exposome/align.hpp"
#include "exposome/error.hpp"
#include "exposome/ingest.hpp"
#include "exposome/stats.hpp"
#include "oracles.hpp"

using namespace exposome;

namespace {

ChannelSpec spec(std::string name, double period = 1.0) { return {std::move(name), "u", period, ChannelKind::Environment}; }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exposome::Error");
  return ErrorKind::StageError;
}

}  // namespace

TEST_CASE("parse_stream reads rows back") {
  const auto s = parse_stream("t_ms,value\n0,1.5\n1000,2.0", spec("x"));
  REQUIRE(s.samples.size() == 2);
  CHECK(s.samples[0].t_ms == 0);
  CHECK(s.samples[0].value == 1.5);
  CHECK(s.samples[1].t_ms == 1000);
  CHECK(s.samples[1].value == 2.0);
}

TEST_CASE("parse_stream rejects decreasing time") {
  CHECK(kind_of([] { parse_stream("t_ms,value\n1000,1.0\n500,2.0", spec("x")); }) == ErrorKind::NonMonotonicTime);
}

TEST_CASE("parse_stream rejects malformed rows") {
  CHECK(kind_of([] { parse_stream("t_ms,value\n0,abc\n", spec("x")); }) == ErrorKind::MalformedRow);
  CHECK(kind_of([] { parse_stream("t_ms,value\n0\n", spec("x")); }) == ErrorKind::MalformedRow);
}

TEST_CASE("parse_stream keeps empty cells as missing and tolerates CRLF") {
  const auto s = parse_stream("t_ms,value\r\n0,\r\n1000,3\r\n", spec("x"));
  REQUIRE(s.samples.size() == 2);
  CHECK(is_missing(s.samples[0].value));
  CHECK(s.samples[1].value == 3.0);
}

TEST_CASE("20 s file with 75 rows spanning 1480 s") {
  std::string csv = "t_ms,value\n";
  for (int i = 0; i < 75; ++i) csv += std::to_string(i * 20000) + "," + std::to_string(i % 7) + "\n";
  const auto s = parse_stream(csv, spec("PM2.5", 20.0));
  CHECK(s.samples.size() == 75);
  CHECK(s.channel.native_period_s == 20.0);
  CHECK(s.samples.back().t_ms - s.samples.front().t_ms == 1480000);
}

TEST_CASE("stream serialization round-trips") {
  RawStream s{spec("x"), {{0, 0.1}, {250, kMissing}, {500, -3.25e-7}}};
  const auto back = parse_stream(serialize_stream(s), s.channel);
  REQUIRE(back.samples.size() == 3);
  CHECK(back.samples[0].value == 0.1);
  CHECK(is_missing(back.samples[1].value));
  CHECK(back.samples[2].value == -3.25e-7);
}

TEST_CASE("geo and label CSVs round-trip") {
  GeoTrace g{{{0, 52.95, -1.15}, {1000, 52.9501, -1.1502}}};
  const auto g2 = parse_geo(serialize_geo(g));
  REQUIRE(g2.points.size() == 2);
  CHECK(g2.points[1].lat == 52.9501);
  CHECK(g2.points[1].lon == -1.1502);
  std::vector<LabelEvent> labels{{0, 3}, {600000, 5}};
  const auto l2 = parse_labels(serialize_labels(labels));
  REQUIRE(l2.size() == 2);
  CHECK(l2[1].valence == 5);
}

TEST_CASE("constant CO2 channel is flagged") {
  SessionBundle b;
  RawStream pm{spec("PM2.5"), {}};
  RawStream co2{spec("CO2"), {}};
  for (int i = 0; i < 60; ++i) {
    pm.samples.push_back({i * 1000, std::sin(i * 0.3)});
    co2.samples.push_back({i * 1000, 412.0});
  }
  b.streams = {pm, co2};
  const auto rep = validate_bundle(b);
  CHECK(rep.constant_channels() == std::vector<std::string>{"CO2"});
  CHECK_FALSE(rep.channels[0].constant);
  CHECK(rep.channels[1].constant);
  REQUIRE(rep.overlap_ms);
  CHECK(rep.overlap_ms->first == 0);
  CHECK(rep.overlap_ms->second == 59000);
}

TEST_CASE("empty stream gives zero coverage and no overlap") {
  SessionBundle b;
  RawStream pm{spec("PM2.5"), {{0, 1.0}, {1000, 2.0}}};
  RawStream empty{spec("EDA"), {}};
  b.streams = {pm, empty};
  const auto rep = validate_bundle(b);
  CHECK(rep.channels[1].coverage_s == 0.0);
  CHECK(rep.channels[1].sample_count == 0);
  CHECK_FALSE(rep.overlap_ms.has_value());
}

TEST_CASE("synthetic bundle has no constant flags") {
  const auto s = generate_synthetic_session(SynthConfig::defaults(), 42);
  const auto rep = validate_bundle(s.bundle);
  CHECK(rep.constant_channels().empty());
  CHECK(rep.channels.size() == 14);
  CHECK(rep.overlap_ms.has_value());
}

TEST_CASE("synthetic generation is deterministic") {
  const auto a = generate_synthetic_session(SynthConfig::defaults(), 42).bundle;
  const auto b = generate_synthetic_session(SynthConfig::defaults(), 42).bundle;
  REQUIRE(a.streams.size() == b.streams.size());
  for (std::size_t i = 0; i < a.streams.size(); ++i) CHECK(serialize_stream(a.streams[i]) == serialize_stream(b.streams[i]));
  CHECK(serialize_geo(a.geo) == serialize_geo(b.geo));
  CHECK(serialize_labels(a.labels) == serialize_labels(b.labels));
  const auto c = generate_synthetic_session(SynthConfig::defaults(), 43).bundle;
  CHECK(serialize_stream(a.streams[0]) != serialize_stream(c.streams[0]));
}

TEST_CASE("uncoupled generator gives near-zero PM2.5/EDA correlation") {
  // The 0.1 bound is an iid critical value of r (two-sided ~0.1% at
  // n = 1500), so physiology must carry no slow latent at all: with the
  // arousal path left in, two independent 90 s OU paths over 1500 s have
  // only ~8 effective samples and spurious |r| ~ 0.3 is routine.
  auto cfg = SynthConfig::defaults();
  for (auto& p : cfg.physiology) {
    p.env_coupling.clear();
    p.arousal_loading = 0.0;
  }
  const auto table = fuse(generate_synthetic_session(cfg, 42).bundle);
  CHECK(table.rows() >= 1400);
  const double r = pearson(table.column("PM2.5"), table.column("EDA"));
  CHECK(std::fabs(r) < 0.1);
}

TEST_CASE("strong PM2.5 -> EDA coupling survives fusion") {
  const auto table = fuse(generate_synthetic_session(SynthConfig::defaults(), 42).bundle);
  CHECK(pearson(table.column("PM2.5"), table.column("EDA")) > 0.8);
}

TEST_CASE("synthetic config validation") {
  auto cfg = SynthConfig::defaults();
  cfg.duration_s = 0;
  CHECK(kind_of([&] { generate_synthetic_session(cfg, 1); }) == ErrorKind::InvalidConfig);
  cfg = SynthConfig::defaults();
  cfg.label_thresholds = {1, 0, 2, 3};
  CHECK(kind_of([&] { generate_synthetic_session(cfg, 1); }) == ErrorKind::InvalidConfig);
}

TEST_CASE("labels are valence 1..5 at the label period") {
  const auto s = generate_synthetic_session(SynthConfig::defaults(), 5);
  REQUIRE_FALSE(s.bundle.labels.empty());
  for (const auto& l : s.bundle.labels) {
    CHECK(l.valence >= 1);
    CHECK(l.valence <= 5);
    CHECK(l.t_ms % 15000 == 0);
  }
}

TEST_CASE("session manifest round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "exposome_ingest_roundtrip";
  std::filesystem::remove_all(dir);
  const auto s = generate_synthetic_session(SynthConfig::defaults(), 11).bundle;
  const auto manifest = write_session(s, dir);
  const auto back = load_session(manifest);
  CHECK(back.participant_id == s.participant_id);
  REQUIRE(back.streams.size() == s.streams.size());
  for (std::size_t i = 0; i < s.streams.size(); ++i) {
    CHECK(back.streams[i].channel == s.streams[i].channel);
    CHECK(serialize_stream(back.streams[i]) == serialize_stream(s.streams[i]));
  }
  CHECK(serialize_labels(back.labels) == serialize_labels(s.labels));
  std::filesystem::remove_all(dir);
}

TEST_CASE("missing manifest file is an IO error") {
  CHECK(kind_of([] { load_session("/nonexistent/manifest.json"); }) == ErrorKind::IoError);
}
