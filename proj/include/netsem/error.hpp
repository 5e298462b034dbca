#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace netsem {

enum class Errc {
  MissingFile,
  SchemaViolation,
  NonMonotonicTimestamps,
  EmptySelection,
  MissingContext,
  NoDemonstrations,
  ProviderError,
  EmptyText,
  DimMismatch,
  TooFewTexts,
  EmptyList,
  UnknownDevice,
  EmptyWindow,
  UnitMismatch,
  EmptyGraph,
  ParseError,
  InvalidSpec,
  UnknownTarget,
  UnknownCategory,
  LengthMismatch,
  EmptyMatrix,
  Usage,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Failure talking to an LLM backend. Remote failures carry the retry
/// metadata; sampling attaches the index of the sample that failed.
class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& message, int attempts = 1,
                         std::optional<int> timeout_ms = std::nullopt)
      : Error(Errc::ProviderError, message), detail_(message), attempts_(attempts),
        timeout_ms_(timeout_ms) {}

  const std::string& detail() const noexcept { return detail_; }
  int attempts() const noexcept { return attempts_; }
  std::optional<int> timeout_ms() const noexcept { return timeout_ms_; }
  std::optional<int> sample_index() const noexcept { return sample_index_; }

  ProviderError with_sample_index(int index) const {
    ProviderError copy(detail_ + " (sample " + std::to_string(index) + ")", attempts_,
                       timeout_ms_);
    copy.detail_ = detail_;
    copy.sample_index_ = index;
    return copy;
  }

 private:
  std::string detail_;
  int attempts_;
  std::optional<int> timeout_ms_;
  std::optional<int> sample_index_;
};

}  // namespace netsem
