#pragma once

#include <cstdint>
#include <filesystem>

#include "osval/dataset.hpp"
#include "osval/svm.hpp"

namespace osval {

// Feature bundle on disk: a directory holding
//
//   features.fbnd   "FBND" | u32 version | u64 n_samples | u64 dim |
//                   n_samples * dim f32, row-major; all little-endian
//   manifest.tsv    one line per matrix row, in row order:
//                   sample_id <TAB> user_id <TAB> genuine|skilled_forgery <TAB> source
//
// The source column is free text without tabs or newlines.
inline constexpr std::uint32_t kBundleVersion = 1;
inline constexpr char kBundleMatrixFile[] = "features.fbnd";
inline constexpr char kBundleManifestFile[] = "manifest.tsv";

// Creates `dir` if needed. Throws Io, InvalidArgument (tab/newline in source).
void write_bundle(const Dataset& ds, const std::filesystem::path& dir);

// Throws Io, BadMagic, VersionUnsupported, LengthMismatch, ManifestMismatch,
// plus the Dataset invariant errors.
Dataset read_bundle(const std::filesystem::path& dir);

// Debug dump of a trained model: "SVMM" | u32 version | every SvmModel field,
// little-endian.
inline constexpr std::uint32_t kModelVersion = 1;
void write_model(const SvmModel& model, const std::filesystem::path& file);
SvmModel read_model(const std::filesystem::path& file);

}  // namespace osval
