#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace exposome {

enum class ErrorKind {
  // ingest
  MalformedRow,
  NonMonotonicTime,
  InvalidConfig,
  // align
  DegenerateInterval,
  EmptyStream,
  ConstantColumn,
  NoOverlap,
  AllChannelsConstant,
  // stats
  InsufficientData,
  ZeroVariance,
  RankDeficient,
  // spatial
  NoSites,
  SiteOutsideBox,
  UnsortedBins,
  NoGeoRows,
  // dbn
  DimensionMismatch,
  EmptyBatch,
  InvalidSizes,
  EmptyData,
  // classify
  NoLabeledRows,
  SingleClass,
  EmptyDataset,
  TooFewRows,
  RowMismatch,
  // pipeline
  ConfigError,
  StageError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers can branch on the condition without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace exposome
