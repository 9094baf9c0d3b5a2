#include "osval/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>
#include <unordered_set>

#include "osval/error.hpp"
#include "osval/random.hpp"

namespace osval {

Dataset::Dataset(std::vector<SampleRecord> records, std::vector<float> matrix, std::size_t dim)
    : records_(std::move(records)), matrix_(std::move(matrix)), dim_(dim) {
  if (dim_ == 0) throw Error(Errc::InvalidDataset, "feature dimension must be positive");
  if (records_.empty()) throw Error(Errc::InvalidDataset, "dataset has no records");
  if (matrix_.size() != records_.size() * dim_) {
    throw Error(Errc::InvalidDataset,
                "matrix holds " + std::to_string(matrix_.size()) + " values, expected " +
                    std::to_string(records_.size() * dim_));
  }
  for (std::size_t i = 0; i < matrix_.size(); ++i) {
    if (!std::isfinite(matrix_[i])) {
      throw Error(Errc::NonFinite, "non-finite feature at row " + std::to_string(i / dim_) +
                                       ", column " + std::to_string(i % dim_));
    }
  }

  UserId max_user = -1;
  index_.reserve(records_.size());
  for (std::size_t r = 0; r < records_.size(); ++r) {
    const auto& rec = records_[r];
    if (rec.user < 0) {
      throw Error(Errc::InvalidDataset, "negative user id at row " + std::to_string(r));
    }
    if (!index_.emplace(rec.id, r).second) {
      throw Error(Errc::InvalidDataset, "duplicate sample id " + std::to_string(rec.id));
    }
    max_user = std::max(max_user, rec.user);
  }
  n_users_ = static_cast<std::size_t>(max_user) + 1;

  genuine_by_user_.resize(n_users_);
  forgery_by_user_.resize(n_users_);
  for (const auto& rec : records_) {
    auto& bucket = rec.kind == SampleKind::Genuine ? genuine_by_user_[rec.user]
                                                   : forgery_by_user_[rec.user];
    bucket.push_back(rec.id);
  }
  for (auto& v : genuine_by_user_) std::sort(v.begin(), v.end());
  for (auto& v : forgery_by_user_) std::sort(v.begin(), v.end());
}

std::span<const float> Dataset::row(std::size_t r) const {
  if (r >= records_.size()) throw Error(Errc::UnknownSample, "row " + std::to_string(r));
  return std::span<const float>(matrix_).subspan(r * dim_, dim_);
}

std::size_t Dataset::row_of(SampleId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(Errc::UnknownSample, "sample id " + std::to_string(id));
  return it->second;
}

const std::vector<SampleId>& Dataset::ids_of(UserId user, SampleKind kind) const {
  if (user < 0 || static_cast<std::size_t>(user) >= n_users_) {
    throw Error(Errc::InvalidArgument, "user " + std::to_string(user) + " out of range");
  }
  return kind == SampleKind::Genuine ? genuine_by_user_[user] : forgery_by_user_[user];
}

bool operator==(const Dataset& a, const Dataset& b) {
  if (a.dim_ != b.dim_ || a.records_.size() != b.records_.size()) return false;
  for (std::size_t i = 0; i < a.records_.size(); ++i) {
    const auto& x = a.records_[i];
    const auto& y = b.records_[i];
    if (x.id != y.id || x.user != y.user || x.kind != y.kind || x.source != y.source) return false;
  }
  // Bitwise comparison so -0.0f and 0.0f differ and the round trip is exact.
  return std::equal(a.matrix_.begin(), a.matrix_.end(), b.matrix_.begin(), [](float u, float v) {
    return std::bit_cast<std::uint32_t>(u) == std::bit_cast<std::uint32_t>(v);
  });
}

namespace {

// Stream tags keep per-purpose shuffles independent of each other.
constexpr std::uint64_t kGenuineStream = 0x67656e75;
constexpr std::uint64_t kForgeryStream = 0x666f7267;
constexpr std::uint64_t kNegativeStream = 0x6e656761;

struct Designation {
  std::vector<SampleId> labeled;
  std::vector<SampleId> test;
};

Designation designate(const Dataset& ds, UserId user, const SplitConfig& cfg,
                      std::uint64_t seed) {
  auto genuines = ds.ids_of(user, SampleKind::Genuine);
  Rng rng(derive_seed(seed, kGenuineStream, static_cast<std::uint64_t>(user)));
  std::shuffle(genuines.begin(), genuines.end(), rng);
  Designation d;
  const std::size_t n_lab = std::min(cfg.n_initial_pos, genuines.size());
  const std::size_t n_test = std::min(cfg.n_test_genuine, genuines.size() - n_lab);
  d.labeled.assign(genuines.begin(), genuines.begin() + n_lab);
  d.test.assign(genuines.begin() + n_lab, genuines.begin() + n_lab + n_test);
  std::sort(d.labeled.begin(), d.labeled.end());
  std::sort(d.test.begin(), d.test.end());
  return d;
}

}  // namespace

UserSplit build_split(const Dataset& ds, UserId target_user, const SplitConfig& cfg,
                      std::uint64_t seed) {
  if (target_user < 0 || static_cast<std::size_t>(target_user) >= ds.n_users()) {
    throw Error(Errc::InvalidArgument, "target user " + std::to_string(target_user) +
                                           " outside [0, " + std::to_string(ds.n_users()) + ")");
  }
  const auto& target_gen = ds.ids_of(target_user, SampleKind::Genuine);
  const auto& target_forg = ds.ids_of(target_user, SampleKind::SkilledForgery);
  if (target_gen.size() < cfg.n_initial_pos + cfg.n_test_genuine) {
    throw Error(Errc::InsufficientSamples,
                "user " + std::to_string(target_user) + " has " +
                    std::to_string(target_gen.size()) + " genuine samples, needs " +
                    std::to_string(cfg.n_initial_pos + cfg.n_test_genuine));
  }
  if (target_forg.size() < cfg.n_test_forgery) {
    throw Error(Errc::InsufficientSamples,
                "user " + std::to_string(target_user) + " has " +
                    std::to_string(target_forg.size()) + " skilled forgeries, needs " +
                    std::to_string(cfg.n_test_forgery));
  }

  UserSplit split;
  split.target_user = target_user;

  std::unordered_set<SampleId> excluded;
  std::vector<SampleId> negative_supply;
  for (std::size_t u = 0; u < ds.n_users(); ++u) {
    const auto user = static_cast<UserId>(u);
    if (user != target_user && ds.ids_of(user, SampleKind::Genuine).size() < cfg.n_initial_pos) {
      throw Error(Errc::InsufficientSamples,
                  "user " + std::to_string(user) + " has " +
                      std::to_string(ds.ids_of(user, SampleKind::Genuine).size()) +
                      " genuine samples, needs " + std::to_string(cfg.n_initial_pos));
    }
    auto d = designate(ds, user, cfg, seed);
    excluded.insert(d.test.begin(), d.test.end());
    if (user == target_user) {
      split.initial_positive_ids = d.labeled;
      split.test_genuine_ids = d.test;
      excluded.insert(d.labeled.begin(), d.labeled.end());
    } else {
      negative_supply.insert(negative_supply.end(), d.labeled.begin(), d.labeled.end());
    }
  }

  if (cfg.n_negatives >= negative_supply.size()) {
    split.initial_negative_ids = negative_supply;
  } else {
    Rng rng(derive_seed(seed, kNegativeStream, static_cast<std::uint64_t>(target_user)));
    std::shuffle(negative_supply.begin(), negative_supply.end(), rng);
    split.initial_negative_ids.assign(negative_supply.begin(),
                                      negative_supply.begin() + cfg.n_negatives);
  }
  std::sort(split.initial_negative_ids.begin(), split.initial_negative_ids.end());
  excluded.insert(split.initial_negative_ids.begin(), split.initial_negative_ids.end());

  auto forgeries = target_forg;
  Rng frng(derive_seed(seed, kForgeryStream, static_cast<std::uint64_t>(target_user)));
  std::shuffle(forgeries.begin(), forgeries.end(), frng);
  split.test_forgery_ids.assign(forgeries.begin(), forgeries.begin() + cfg.n_test_forgery);
  std::sort(split.test_forgery_ids.begin(), split.test_forgery_ids.end());

  for (std::size_t u = 0; u < ds.n_users(); ++u) {
    for (SampleId id : ds.ids_of(static_cast<UserId>(u), SampleKind::Genuine)) {
      if (!excluded.contains(id)) split.unlabeled_pool_ids.push_back(id);
    }
  }
  std::sort(split.unlabeled_pool_ids.begin(), split.unlabeled_pool_ids.end());
  return split;
}

}  // namespace osval
