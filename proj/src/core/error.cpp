#include "cyclebench/core/error.hpp"

#include <utility>

namespace cyclebench {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kUnknownFormat: return "UnknownFormat";
    case ErrorCode::kAmbiguousFormat: return "AmbiguousFormat";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kEmptyFile: return "EmptyFile";
    case ErrorCode::kUnitError: return "UnitError";
    case ErrorCode::kMissingRequiredColumn: return "MissingRequiredColumn";
    case ErrorCode::kInvalidProfile: return "InvalidProfile";
    case ErrorCode::kChannelMismatch: return "ChannelMismatch";
    case ErrorCode::kNoCycles: return "NoCycles";
    case ErrorCode::kDegenerateCycle: return "DegenerateCycle";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kEmptySelection: return "EmptySelection";
    case ErrorCode::kInvalidSelector: return "InvalidSelector";
    case ErrorCode::kBadBinWidth: return "BadBinWidth";
    case ErrorCode::kNoPulsesFound: return "NoPulsesFound";
    case ErrorCode::kNonPositiveDeltaEt: return "NonPositiveDeltaEt";
    case ErrorCode::kMixedDomain: return "MixedDomain";
    case ErrorCode::kUnknownVariable: return "UnknownVariable";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kValidationError: return "ValidationError";
    case ErrorCode::kShardUnavailable: return "ShardUnavailable";
    case ErrorCode::kConflict: return "Conflict";
    case ErrorCode::kForbidden: return "Forbidden";
    case ErrorCode::kUnauthorized: return "Unauthorized";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, std::string const& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code) {}

ParseError::ParseError(std::size_t line, std::string reason)
    : Error(ErrorCode::kParseError,
            "line " + std::to_string(line) + ": " + reason),
      line_(line),
      reason_(std::move(reason)) {}

namespace {
std::string JoinCandidates(std::vector<std::string> const& c) {
  std::string out;
  for (auto const& s : c) {
    if (!out.empty()) out += ", ";
    out += s;
  }
  return out;
}
}  // namespace

AmbiguousFormat::AmbiguousFormat(std::vector<std::string> candidates)
    : Error(ErrorCode::kAmbiguousFormat,
            "multiple profiles match: " + JoinCandidates(candidates)),
      candidates_(std::move(candidates)) {}

}  // namespace cyclebench
