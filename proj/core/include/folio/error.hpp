#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace folio {

enum class Errc {
  MissingImage,
  DuplicateDocId,
  MalformedManifest,
  InvalidChunking,
  EmptyInput,
  ProviderUnreachable,
  ProviderBadResponse,
  DimMismatch,
  ZeroProjection,
  NonFiniteLoss,
  NotDivisible,
  EmptyIndex,
  EfTooSmall,
  Io,
  CorruptFile,
  BudgetTooSmall,
  SessionNotFound,
  AlternationViolation,
  EmptyBenchmark,
  InvalidArgument,
  NotFound,
};

std::string_view to_string(Errc code) noexcept;

// Base for every error raised by the library. Callers that only care about
// the category switch on code(); the subclasses below carry extra context.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class MalformedManifest : public Error {
 public:
  MalformedManifest(std::size_t line, const std::string& reason)
      : Error(Errc::MalformedManifest,
              "malformed manifest at line " + std::to_string(line) + ": " + reason),
        line_(line),
        reason_(reason) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class CorruptFile : public Error {
 public:
  CorruptFile(std::uint64_t offset, const std::string& reason)
      : Error(Errc::CorruptFile,
              "corrupt file at offset " + std::to_string(offset) + ": " + reason),
        offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class NonFiniteLoss : public Error {
 public:
  explicit NonFiniteLoss(int epoch)
      : Error(Errc::NonFiniteLoss,
              "training diverged: non-finite loss at epoch " + std::to_string(epoch)),
        epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace folio
