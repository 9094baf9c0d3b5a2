#include "osval/metrics.hpp"

#include "osval/error.hpp"

namespace osval {

namespace {

Ratio ratio(std::size_t num, std::size_t den) noexcept {
  if (den == 0) return {0.0, true};
  return {static_cast<double>(num) / static_cast<double>(den), false};
}

}  // namespace

Ratio precision(const ConfusionCounts& c) noexcept { return ratio(c.tp, c.tp + c.fp); }
Ratio recall(const ConfusionCounts& c) noexcept { return ratio(c.tp, c.tp + c.fn); }
Ratio accuracy(const ConfusionCounts& c) noexcept { return ratio(c.tp + c.tn, c.total()); }

double f1_from(double p, double r) noexcept {
  if (p + r == 0.0) return 0.0;
  return 2.0 * r * p / (r + p);
}

Ratio f1(const ConfusionCounts& c) noexcept {
  const auto p = precision(c);
  const auto r = recall(c);
  return {f1_from(p.value, r.value), p.degenerate || r.degenerate || p.value + r.value == 0.0};
}

ConfusionCounts tally(std::span<const double> decisions, std::span<const int> truth) {
  if (decisions.size() != truth.size()) {
    throw Error(Errc::InvalidArgument, "prediction and truth counts differ");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < decisions.size(); ++i) {
    const bool predicted = decisions[i] > 0.0;
    const bool actual = truth[i] > 0;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

Ratio query_composition(const ActiveState& state, const UserSplit& split, const Dataset& ds) {
  std::size_t genuine = 0;
  for (const auto& q : state.queries) {
    const auto& rec = ds.record(q.id);
    if (rec.user == split.target_user && rec.kind == SampleKind::Genuine) ++genuine;
  }
  return ratio(genuine, state.queries.size());
}

}  // namespace osval
