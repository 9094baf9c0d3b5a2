#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace osval {

enum class Errc {
  InvalidArgument,
  InvalidDataset,
  UnknownSample,
  InsufficientSamples,
  SingleClass,
  NonFinite,
  DimensionMismatch,
  Uncalibrated,
  EmptyBand,
  PoolTooSmall,
  EmptyPool,
  BadMagic,
  VersionUnsupported,
  LengthMismatch,
  ManifestMismatch,
  Io,
  Parse,
};

std::string_view to_string(Errc code) noexcept;

// All library failures are reported through this type; `code()` is stable,
// `what()` is a single-line diagnostic naming the offending item.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  // The diagnostic without the leading code name.
  const std::string& message() const noexcept { return message_; }

 private:
  Errc code_;
  std::string message_;
};

}  // namespace osval
