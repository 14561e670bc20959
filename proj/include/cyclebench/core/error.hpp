#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cyclebench {

enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  kUnknownFormat,
  kAmbiguousFormat,
  kParseError,
  kEmptyFile,
  kUnitError,
  kMissingRequiredColumn,
  kInvalidProfile,
  kChannelMismatch,
  kNoCycles,
  kDegenerateCycle,
  kEmptyInput,
  kEmptySelection,
  kInvalidSelector,
  kBadBinWidth,
  kNoPulsesFound,
  kNonPositiveDeltaEt,
  kMixedDomain,
  kUnknownVariable,
  kNotFound,
  kValidationError,
  kShardUnavailable,
  kConflict,
  kForbidden,
  kUnauthorized,
};

std::string_view ErrorCodeName(ErrorCode code);

// Base exception for every failure surfaced by the library. The code is
// stable and is what the service maps onto HTTP statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string const& message);

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return ErrorCodeName(code_); }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::string reason);

  std::size_t line() const noexcept { return line_; }
  std::string const& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class AmbiguousFormat : public Error {
 public:
  explicit AmbiguousFormat(std::vector<std::string> candidates);

  std::vector<std::string> const& candidates() const noexcept {
    return candidates_;
  }

 private:
  std::vector<std::string> candidates_;
};

}  // namespace cyclebench
