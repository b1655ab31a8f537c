#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stoic {

enum class ErrorCode {
  BadLabel,
  BadSymbol,
  DuplicateSequence,
  DuplicateId,
  EmptyFile,
  MalformedCsv,
  TooFewSamples,
  NotPositiveDefinite,
  LayoutMismatch,
  OneClassOnly,
  LengthMismatch,
  Empty,
  BadPercent,
  PositionOutOfRange,
  BadChainCount,
  Network,
  HttpStatus,
  MalformedResponse,
  BadFasta,
  InsufficientUnique,
  BadConfig,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Domain error carrying a machine-checkable code. All library failures are
/// reported through this type so callers can branch on `code()`.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Error for an HTTP response with a non-success status.
class HttpStatusError : public Error {
 public:
  HttpStatusError(int status, const std::string& url)
      : Error(ErrorCode::HttpStatus, "HTTP " + std::to_string(status) + " from " + url),
        status_(status) {}

  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace stoic
