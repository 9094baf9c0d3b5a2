#include "osval/error.hpp"

namespace osval {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidDataset: return "InvalidDataset";
    case Errc::UnknownSample: return "UnknownSample";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::SingleClass: return "SingleClass";
    case Errc::NonFinite: return "NonFinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::Uncalibrated: return "Uncalibrated";
    case Errc::EmptyBand: return "EmptyBand";
    case Errc::PoolTooSmall: return "PoolTooSmall";
    case Errc::EmptyPool: return "EmptyPool";
    case Errc::BadMagic: return "BadMagic";
    case Errc::VersionUnsupported: return "VersionUnsupported";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ManifestMismatch: return "ManifestMismatch";
    case Errc::Io: return "Io";
    case Errc::Parse: return "Parse";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code),
      message_(message) {}

}  // namespace osval
