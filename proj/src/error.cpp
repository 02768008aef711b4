#include "exposome/error.hpp"

namespace exposome {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::DegenerateInterval: return "DegenerateInterval";
    case ErrorKind::EmptyStream: return "EmptyStream";
    case ErrorKind::ConstantColumn: return "ConstantColumn";
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::AllChannelsConstant: return "AllChannelsConstant";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NoSites: return "NoSites";
    case ErrorKind::SiteOutsideBox: return "SiteOutsideBox";
    case ErrorKind::UnsortedBins: return "UnsortedBins";
    case ErrorKind::NoGeoRows: return "NoGeoRows";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyBatch: return "EmptyBatch";
    case ErrorKind::InvalidSizes: return "InvalidSizes";
    case ErrorKind::EmptyData: return "EmptyData";
    case ErrorKind::NoLabeledRows: return "NoLabeledRows";
    case ErrorKind::SingleClass: return "SingleClass";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::RowMismatch: return "RowMismatch";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::StageError: return "StageError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace exposome
