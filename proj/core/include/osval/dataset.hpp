#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace osval {

using SampleId = std::int64_t;
using UserId = std::int32_t;

enum class SampleKind : std::uint8_t { Genuine, SkilledForgery };

struct SampleRecord {
  SampleId id = 0;
  UserId user = 0;
  SampleKind kind = SampleKind::Genuine;
  // Free text, e.g. the feature-variant label the vectors were extracted with.
  std::string source;
};

// Immutable set of per-user signature feature vectors. Features are stored
// row-major as 32-bit floats, one row per record, in record order.
class Dataset {
 public:
  // Validates every invariant: dim > 0, at least one record, finite features,
  // unique sample ids, matrix size == records * dim.
  Dataset(std::vector<SampleRecord> records, std::vector<float> matrix, std::size_t dim);

  std::size_t size() const noexcept { return records_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_users() const noexcept { return n_users_; }

  std::span<const SampleRecord> records() const noexcept { return records_; }
  std::span<const float> matrix() const noexcept { return matrix_; }

  const SampleRecord& record_at(std::size_t row) const { return records_.at(row); }
  std::span<const float> row(std::size_t r) const;

  // Throws Errc::UnknownSample.
  std::size_t row_of(SampleId id) const;
  const SampleRecord& record(SampleId id) const { return records_[row_of(id)]; }
  std::span<const float> features(SampleId id) const { return row(row_of(id)); }

  // Ids of one user's samples of one kind, ascending.
  const std::vector<SampleId>& ids_of(UserId user, SampleKind kind) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  std::vector<SampleRecord> records_;
  std::vector<float> matrix_;
  std::size_t dim_ = 0;
  std::size_t n_users_ = 0;
  std::unordered_map<SampleId, std::size_t> index_;
  std::vector<std::vector<SampleId>> genuine_by_user_;
  std::vector<std::vector<SampleId>> forgery_by_user_;
};

// Per-user split recipe.
struct SplitConfig {
  std::size_t n_initial_pos = 2;
  std::size_t n_negatives = 228;
  std::size_t n_test_genuine = 12;
  std::size_t n_test_forgery = 12;
};

// Every id list is sorted ascending.
struct UserSplit {
  UserId target_user = 0;
  std::vector<SampleId> initial_positive_ids;
  std::vector<SampleId> initial_negative_ids;
  std::vector<SampleId> unlabeled_pool_ids;
  std::vector<SampleId> test_genuine_ids;
  std::vector<SampleId> test_forgery_ids;

  friend bool operator==(const UserSplit&, const UserSplit&) = default;
};

// Builds the labeled/pool/test partition for one target user.
//
// Each user's genuines are shuffled with a seed derived from (seed, user);
// the first n_initial_pos become that user's designated labeled genuines and
// the next n_test_genuine its test genuines. The designation is global, so
// every user's split agrees on which samples are labeled and which are held
// out. Negatives are drawn from other users' designated labeled genuines
// (all of them when n_negatives covers the supply). The pool is every
// remaining genuine: not labeled in this split and not in any user's test
// set. Skilled forgeries only ever appear in the target's test set.
//
// Throws Errc::InsufficientSamples when a user cannot supply the recipe.
UserSplit build_split(const Dataset& ds, UserId target_user, const SplitConfig& cfg,
                      std::uint64_t seed);

}  // namespace osval
