#pragma once

#include <cstddef>
#include <span>

#include "osval/active.hpp"
#include "osval/dataset.hpp"

namespace osval {

// Positive class = genuine.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// A ratio whose denominator may vanish. 0/0 evaluates to 0 with the flag set.
struct Ratio {
  double value = 0.0;
  bool degenerate = false;
};

Ratio precision(const ConfusionCounts& c) noexcept;  // tp / (tp + fp)
Ratio recall(const ConfusionCounts& c) noexcept;     // tp / (tp + fn)
Ratio accuracy(const ConfusionCounts& c) noexcept;   // (tp + tn) / total
Ratio f1(const ConfusionCounts& c) noexcept;
// 2 p r / (p + r), 0 when p + r == 0.
double f1_from(double precision, double recall) noexcept;

// Tallies predictions (positive iff decision > 0) against truth labels (+1/-1).
ConfusionCounts tally(std::span<const double> decisions, std::span<const int> truth);

// Fraction of logged queries that were genuines of the split's target user.
Ratio query_composition(const ActiveState& state, const UserSplit& split, const Dataset& ds);

}  // namespace osval
