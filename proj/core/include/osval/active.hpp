#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "osval/dataset.hpp"
#include "osval/svm.hpp"

namespace osval {

enum class StrategyKind : std::uint8_t { Distance, Entropy, Knn, Random };

// Band widening: Auto means on for Entropy and Knn, off for Distance.
enum class WidenMode : std::uint8_t { Auto, On, Off };

// How the KNN diversity score sums distances within {x_i} + its neighbours.
enum class KnnScore : std::uint8_t {
  PairwiseAverage,  // mean over all (k+1)k/2 unordered pairs
  AnchorSum,        // 2/(k(k+1)) * sum of distances from x_i to its neighbours
};

struct Strategy {
  StrategyKind kind = StrategyKind::Distance;
  std::size_t k = 5;
  KnnScore knn_score = KnnScore::PairwiseAverage;
  // Knn picks the whole budget from one band in a single round.
  bool knn_batch = true;
  WidenMode widen = WidenMode::Auto;
  double c_floor = 1e-3;

  bool widening_enabled() const noexcept;
};

struct QueryRecord {
  std::size_t round = 0;
  SampleId id = 0;
  int label = 0;          // oracle answer, +1 or -1
  bool fallback = false;  // chosen at random because the band was empty

  friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

struct RoundLog {
  std::size_t round = 0;
  std::size_t pool_size = 0;
  std::size_t band_size = 0;
  std::size_t widen_retrains = 0;
  double c = 0.0;              // penalty of the model the query was chosen with
  bool c_floor_reached = false;  // widening stopped at the floor with a small band
  bool fallback = false;
};

struct ActiveState {
  std::vector<SampleId> labeled_pos;  // ascending
  std::vector<SampleId> labeled_neg;  // ascending
  std::vector<SampleId> pool;         // ascending
  std::vector<QueryRecord> queries;
  std::vector<RoundLog> rounds;
  double current_c = 0.0;
};

// Pool ids with |f(x)| <= 1, ascending.
std::vector<SampleId> margin_band(const SvmModel& model, std::span<const SampleId> pool,
                                  const Dataset& ds);

struct WidenResult {
  SvmModel model;
  std::vector<SampleId> band;
  double c = 0.0;
  std::size_t retrains = 0;
  bool c_floor_reached = false;
};

// While |band| < |pool| / 3 and c > c_floor, halves c (clamped to the floor),
// retrains on the state's labels and recomputes the band. Returns the widest
// band seen; `model` is the model that produced it.
WidenResult widen_band(const ActiveState& state, SvmModel model, const Dataset& ds,
                       const SvmConfig& cfg, double c_floor);

struct Scored {
  SampleId id = 0;
  double value = 0.0;
};

// Natural-log binary entropy; 0 at p in {0, 1}.
double binary_entropy(double p) noexcept;
// Entropy of p = 1 / (1 + exp(z)), symmetric in z.
double logit_entropy(double z) noexcept;

// Argmin |value| / argmax value over precomputed scores, ties to smallest id.
SampleId argmin_abs(std::span<const Scored> scored);
SampleId argmax_value(std::span<const Scored> scored);

// Throws EmptyBand.
SampleId select_distance(const SvmModel& model, std::span<const SampleId> band,
                         const Dataset& ds);
// Throws EmptyBand, Uncalibrated.
SampleId select_entropy(const SvmModel& model, std::span<const SampleId> band,
                        const Dataset& ds);

// Diversity score of every band member: x_i plus its k nearest pool
// neighbours (Euclidean, x_i itself excluded, ties to smaller id). Output is
// in band order. Throws EmptyBand, PoolTooSmall.
std::vector<Scored> knn_scores(std::span<const SampleId> band, std::span<const SampleId> pool,
                               const Dataset& ds, std::size_t k,
                               KnnScore score = KnnScore::PairwiseAverage);
SampleId select_knn(std::span<const SampleId> band, std::span<const SampleId> pool,
                    const Dataset& ds, std::size_t k,
                    KnnScore score = KnnScore::PairwiseAverage);

// Uniform draw. Throws EmptyPool.
SampleId select_random(std::span<const SampleId> pool, std::uint64_t seed);

// Called with (number of queries labeled so far, model trained on them).
using RoundObserver = std::function<void(std::size_t, const SvmModel&)>;

struct ActiveResult {
  SvmModel model;
  ActiveState state;
};

// Pool-based loop for one user: train -> band (+ widening) -> select -> ask
// the oracle -> move to the labeled set, `budget` times, then a final retrain
// on every label. The oracle answers +1 iff the sample is a genuine of
// split.target_user. Every model is Platt-calibrated.
ActiveResult run_al_loop(const UserSplit& split, const Strategy& strategy, std::size_t budget,
                         const SvmConfig& cfg, const Dataset& ds, std::uint64_t seed,
                         const RoundObserver& observer = {});

}  // namespace osval
