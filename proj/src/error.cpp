#include "causalcast/error.hpp"

namespace causalcast {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NoOverlap: return "NoOverlap";
    case ErrorKind::DuplicateDate: return "DuplicateDate";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::InvalidPanel: return "InvalidPanel";
    case ErrorKind::BadTransformCode: return "BadTransformCode";
    case ErrorKind::MalformedCsv: return "MalformedCsv";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::OverlappingRanges: return "OverlappingRanges";
    case ErrorKind::BadRange: return "BadRange";
    case ErrorKind::Underdetermined: return "Underdetermined";
    case ErrorKind::InfiniteStatistic: return "InfiniteStatistic";
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::BadK: return "BadK";
    case ErrorKind::TooManyCovariates: return "TooManyCovariates";
    case ErrorKind::NotAcyclic: return "NotAcyclic";
    case ErrorKind::BadName: return "BadName";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::NeedEnvironments: return "NeedEnvironments";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::WindowTooLong: return "WindowTooLong";
    case ErrorKind::Insufficient: return "Insufficient";
    case ErrorKind::Misaligned: return "Misaligned";
    case ErrorKind::GenerationFailed: return "GenerationFailed";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace causalcast
