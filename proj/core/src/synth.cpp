#include "osval/synth.hpp"

#include <cmath>
#include <random>
#include <vector>

#include "osval/error.hpp"
#include "osval/random.hpp"

namespace osval {

std::optional<SynthConfig> synth_preset(std::string_view name) {
  if (name == "utsig-like") {
    SynthConfig cfg;
    cfg.n_users = 115;
    cfg.n_genuine_per_user = 27;
    cfg.n_forgery_per_user = 42;
    cfg.dim = 64;
    cfg.intra_class_sigma = 1.5;
    cfg.forgery_offset_sigma = 2.5;
    cfg.forgery_sigma = 0.5;
    cfg.inter_user_scale = 1.0;
    cfg.intra_class_rank = 2;
    cfg.seed = 20190805;
    cfg.source = "synth:utsig-like";
    return cfg;
  }
  return std::nullopt;
}

Dataset generate(const SynthConfig& cfg) {
  if (cfg.n_users == 0 || cfg.dim == 0 || cfg.n_genuine_per_user + cfg.n_forgery_per_user == 0) {
    throw Error(Errc::InvalidArgument, "synth needs users, dim and samples >= 1");
  }
  if (cfg.intra_class_sigma < 0 || cfg.forgery_offset_sigma < 0 || cfg.forgery_sigma < 0 ||
      cfg.inter_user_scale < 0) {
    throw Error(Errc::InvalidArgument, "synth sigmas must be non-negative");
  }
  const std::size_t per_user = cfg.n_genuine_per_user + cfg.n_forgery_per_user;
  std::vector<SampleRecord> records;
  records.reserve(cfg.n_users * per_user);
  std::vector<float> matrix;
  matrix.reserve(cfg.n_users * per_user * cfg.dim);

  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<double> mean(cfg.dim);
  std::vector<double> forger_mean(cfg.dim);
  const std::size_t rank = cfg.intra_class_rank;
  std::vector<double> loading(cfg.dim * rank);
  std::vector<double> z(rank);
  SampleId next_id = 0;
  for (std::size_t u = 0; u < cfg.n_users; ++u) {
    // One stream per user so user u's samples do not depend on n_users.
    Rng rng(derive_seed(cfg.seed, u));
    for (auto& m : mean) m = cfg.inter_user_scale * unit(rng);
    for (std::size_t k = 0; k < cfg.dim; ++k) {
      forger_mean[k] = mean[k] + cfg.forgery_offset_sigma * unit(rng);
    }
    // d x r loading with N(0, 1/r) entries, so E|W z|^2 = dim.
    for (auto& w : loading) w = unit(rng) / std::sqrt(static_cast<double>(rank));
    auto emit = [&](const std::vector<double>& centre, double sigma, SampleKind kind) {
      if (rank == 0) {
        for (std::size_t k = 0; k < cfg.dim; ++k) {
          matrix.push_back(static_cast<float>(centre[k] + sigma * unit(rng)));
        }
      } else {
        for (auto& zr : z) zr = unit(rng);
        for (std::size_t k = 0; k < cfg.dim; ++k) {
          double v = 0.0;
          for (std::size_t r = 0; r < rank; ++r) v += loading[k * rank + r] * z[r];
          matrix.push_back(static_cast<float>(centre[k] + sigma * v));
        }
      }
      records.push_back({next_id++, static_cast<UserId>(u), kind, cfg.source});
    };
    for (std::size_t g = 0; g < cfg.n_genuine_per_user; ++g) {
      emit(mean, cfg.intra_class_sigma, SampleKind::Genuine);
    }
    for (std::size_t f = 0; f < cfg.n_forgery_per_user; ++f) {
      emit(forger_mean, cfg.forgery_sigma, SampleKind::SkilledForgery);
    }
  }
  return Dataset(std::move(records), std::move(matrix), cfg.dim);
}

}  // namespace osval
