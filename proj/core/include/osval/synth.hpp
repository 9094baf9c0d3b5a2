#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "osval/dataset.hpp"

namespace osval {

// Gaussian-cluster stand-in for per-user signature features.
struct SynthConfig {
  std::size_t n_users = 115;
  std::size_t n_genuine_per_user = 27;
  std::size_t n_forgery_per_user = 42;
  std::size_t dim = 64;
  double intra_class_sigma = 1.0;      // genuine spread around the user mean
  double forgery_offset_sigma = 1.0;   // per-user displacement of the forger's mean
  double forgery_sigma = 1.0;          // forgery spread around the displaced mean
  double inter_user_scale = 1.0;       // spread of user means around the origin
  // Number of per-user directions carrying the within-user variation of both
  // genuines and forgeries; 0 means isotropic. Total variance is dim * sigma^2
  // either way.
  std::size_t intra_class_rank = 0;
  std::uint64_t seed = 0;
  std::string source = "synth";
};

// Frozen presets shipped with the library. Returns nullopt for unknown names.
std::optional<SynthConfig> synth_preset(std::string_view name);

// Sample ids are assigned in generation order: for each user, its genuines
// then its forgeries.
Dataset generate(const SynthConfig& cfg);

}  // namespace osval
