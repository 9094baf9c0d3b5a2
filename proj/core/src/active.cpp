#include "osval/active.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "osval/error.hpp"
#include "osval/random.hpp"

namespace osval {

bool Strategy::widening_enabled() const noexcept {
  switch (widen) {
    case WidenMode::On: return kind != StrategyKind::Random;
    case WidenMode::Off: return false;
    case WidenMode::Auto: return kind == StrategyKind::Entropy || kind == StrategyKind::Knn;
  }
  return false;
}

std::vector<SampleId> margin_band(const SvmModel& model, std::span<const SampleId> pool,
                                  const Dataset& ds) {
  std::vector<SampleId> band;
  for (SampleId id : pool) {
    const double f = model.decision(ds.features(id));
    if (f >= -1.0 && f <= 1.0) band.push_back(id);
  }
  std::sort(band.begin(), band.end());
  return band;
}

namespace {

SvmModel train_on(const ActiveState& state, const Dataset& ds, SvmConfig cfg, double c) {
  cfg.c = c;
  const auto data = make_training_set(ds, state.labeled_pos, state.labeled_neg);
  return fit_platt(train(data, cfg), data);
}

// |band| < |pool| / 3 without rounding.
bool band_too_narrow(std::size_t band, std::size_t pool) { return 3 * band < pool; }

}  // namespace

WidenResult widen_band(const ActiveState& state, SvmModel model, const Dataset& ds,
                       const SvmConfig& cfg, double c_floor) {
  if (!(c_floor > 0.0)) throw Error(Errc::InvalidArgument, "c_floor must be positive");
  WidenResult out;
  out.c = state.current_c > 0.0 ? state.current_c : cfg.c;
  out.band = margin_band(model, state.pool, ds);
  out.model = std::move(model);

  double c = out.c;
  while (band_too_narrow(out.band.size(), state.pool.size()) && c > c_floor) {
    c = std::max(c / 2.0, c_floor);
    ++out.retrains;
    auto candidate = train_on(state, ds, cfg, c);
    auto band = margin_band(candidate, state.pool, ds);
    if (band.size() >= out.band.size()) {
      out.model = std::move(candidate);
      out.band = std::move(band);
      out.c = c;
    }
  }
  out.c_floor_reached = band_too_narrow(out.band.size(), state.pool.size());
  return out;
}

double binary_entropy(double p) noexcept {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -(p * std::log(p) + (1.0 - p) * std::log1p(-p));
}

double logit_entropy(double z) noexcept {
  // p = 1 / (1 + e^z); written in |z| so that z and -z score identically.
  const double t = std::abs(z);
  const double e = std::exp(-t);
  return std::log1p(e) + t * e / (1.0 + e);
}

SampleId argmin_abs(std::span<const Scored> scored) {
  if (scored.empty()) throw Error(Errc::EmptyBand, "no candidates to choose from");
  const Scored* best = &scored[0];
  for (const auto& s : scored) {
    const double a = std::abs(s.value);
    const double b = std::abs(best->value);
    if (a < b || (a == b && s.id < best->id)) best = &s;
  }
  return best->id;
}

SampleId argmax_value(std::span<const Scored> scored) {
  if (scored.empty()) throw Error(Errc::EmptyBand, "no candidates to choose from");
  const Scored* best = &scored[0];
  for (const auto& s : scored) {
    if (s.value > best->value || (s.value == best->value && s.id < best->id)) best = &s;
  }
  return best->id;
}

SampleId select_distance(const SvmModel& model, std::span<const SampleId> band,
                         const Dataset& ds) {
  if (band.empty()) throw Error(Errc::EmptyBand, "distance sampling on an empty band");
  std::vector<Scored> scored;
  scored.reserve(band.size());
  for (SampleId id : band) scored.push_back({id, model.decision(ds.features(id))});
  return argmin_abs(scored);
}

SampleId select_entropy(const SvmModel& model, std::span<const SampleId> band,
                        const Dataset& ds) {
  if (band.empty()) throw Error(Errc::EmptyBand, "entropy sampling on an empty band");
  if (!model.platt) throw Error(Errc::Uncalibrated, "entropy sampling needs a platt sigmoid");
  std::vector<Scored> scored;
  scored.reserve(band.size());
  for (SampleId id : band) {
    const double z = model.platt->a * model.decision(ds.features(id)) + model.platt->b;
    scored.push_back({id, logit_entropy(z)});
  }
  return argmax_value(scored);
}

namespace {

double euclidean(std::span<const float> a, std::span<const float> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace

std::vector<Scored> knn_scores(std::span<const SampleId> band, std::span<const SampleId> pool,
                               const Dataset& ds, std::size_t k, KnnScore score) {
  if (band.empty()) throw Error(Errc::EmptyBand, "knn sampling on an empty band");
  if (k == 0) throw Error(Errc::InvalidArgument, "knn needs k >= 1");
  if (pool.size() < k + 1) {
    throw Error(Errc::PoolTooSmall, "pool has " + std::to_string(pool.size()) +
                                        " samples, knn needs k + 1 = " + std::to_string(k + 1));
  }
  const double norm = 2.0 / (static_cast<double>(k) * static_cast<double>(k + 1));

  std::vector<std::size_t> pool_rows(pool.size());
  for (std::size_t p = 0; p < pool.size(); ++p) pool_rows[p] = ds.row_of(pool[p]);

  std::vector<Scored> out;
  out.reserve(band.size());
  std::vector<Scored> cand;
  cand.reserve(pool.size());
  std::vector<std::span<const float>> group;
  for (SampleId id : band) {
    const auto xi = ds.features(id);
    cand.clear();
    for (std::size_t p = 0; p < pool.size(); ++p) {
      if (pool[p] == id) continue;
      cand.push_back({pool[p], euclidean(xi, ds.row(pool_rows[p]))});
    }
    if (cand.size() < k) {
      throw Error(Errc::PoolTooSmall, "sample " + std::to_string(id) + " has fewer than k " +
                                          "pool neighbours");
    }
    auto closer = [](const Scored& a, const Scored& b) {
      return a.value < b.value || (a.value == b.value && a.id < b.id);
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(),
                      closer);

    double sum = 0.0;
    if (score == KnnScore::AnchorSum) {
      for (std::size_t j = 0; j < k; ++j) sum += cand[j].value;
    } else {
      group.assign({xi});
      for (std::size_t j = 0; j < k; ++j) group.push_back(ds.features(cand[j].id));
      for (std::size_t a = 0; a < group.size(); ++a) {
        for (std::size_t b = a + 1; b < group.size(); ++b) sum += euclidean(group[a], group[b]);
      }
    }
    out.push_back({id, norm * sum});
  }
  return out;
}

SampleId select_knn(std::span<const SampleId> band, std::span<const SampleId> pool,
                    const Dataset& ds, std::size_t k, KnnScore score) {
  return argmax_value(knn_scores(band, pool, ds, k, score));
}

SampleId select_random(std::span<const SampleId> pool, std::uint64_t seed) {
  if (pool.empty()) throw Error(Errc::EmptyPool, "random sampling on an empty pool");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng)];
}

namespace {

constexpr std::uint64_t kRandomStream = 0x72616e64;

void insert_sorted(std::vector<SampleId>& v, SampleId id) {
  v.insert(std::lower_bound(v.begin(), v.end(), id), id);
}

void move_to_labeled(ActiveState& st, const Dataset& ds, UserId target, SampleId id,
                     std::size_t round, bool fallback) {
  auto it = std::lower_bound(st.pool.begin(), st.pool.end(), id);
  if (it == st.pool.end() || *it != id) {
    throw Error(Errc::UnknownSample, "query " + std::to_string(id) + " is not in the pool");
  }
  st.pool.erase(it);
  const auto& rec = ds.record(id);
  const int label = (rec.user == target && rec.kind == SampleKind::Genuine) ? +1 : -1;
  insert_sorted(label > 0 ? st.labeled_pos : st.labeled_neg, id);
  st.queries.push_back({round, id, label, fallback});
}

}  // namespace

ActiveResult run_al_loop(const UserSplit& split, const Strategy& strategy, std::size_t budget,
                         const SvmConfig& cfg, const Dataset& ds, std::uint64_t seed,
                         const RoundObserver& observer) {
  if (strategy.kind == StrategyKind::Knn && strategy.k == 0) {
    throw Error(Errc::InvalidArgument, "knn strategy needs k >= 1");
  }
  ActiveState st;
  st.labeled_pos = split.initial_positive_ids;
  st.labeled_neg = split.initial_negative_ids;
  st.pool = split.unlabeled_pool_ids;
  std::sort(st.labeled_pos.begin(), st.labeled_pos.end());
  std::sort(st.labeled_neg.begin(), st.labeled_neg.end());
  std::sort(st.pool.begin(), st.pool.end());
  st.current_c = cfg.c;

  const bool batch = strategy.kind == StrategyKind::Knn && strategy.knn_batch;
  const std::size_t rounds = batch ? std::min<std::size_t>(budget, 1) : budget;

  for (std::size_t round = 0; round < rounds && !st.pool.empty(); ++round) {
    auto model = train_on(st, ds, cfg, st.current_c);
    if (observer) observer(st.queries.size(), model);

    RoundLog log;
    log.round = round;
    log.pool_size = st.pool.size();
    log.c = st.current_c;

    std::vector<SampleId> picks;
    if (strategy.kind == StrategyKind::Random) {
      picks.push_back(select_random(st.pool, derive_seed(seed, kRandomStream, round)));
    } else {
      std::vector<SampleId> band;
      if (strategy.widening_enabled()) {
        auto widened = widen_band(st, std::move(model), ds, cfg, strategy.c_floor);
        model = std::move(widened.model);
        band = std::move(widened.band);
        st.current_c = widened.c;
        log.widen_retrains = widened.retrains;
        log.c_floor_reached = widened.c_floor_reached;
        log.c = widened.c;
      } else {
        band = margin_band(model, st.pool, ds);
      }
      log.band_size = band.size();

      if (!band.empty()) {
        switch (strategy.kind) {
          case StrategyKind::Distance: picks.push_back(select_distance(model, band, ds)); break;
          case StrategyKind::Entropy: picks.push_back(select_entropy(model, band, ds)); break;
          case StrategyKind::Knn: {
            if (st.pool.size() < strategy.k + 1) break;  // falls back below
            auto scored = knn_scores(band, st.pool, ds, strategy.k, strategy.knn_score);
            std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
              return a.value > b.value || (a.value == b.value && a.id < b.id);
            });
            const std::size_t take = batch ? std::min(budget, scored.size()) : 1;
            for (std::size_t q = 0; q < take; ++q) picks.push_back(scored[q].id);
            break;
          }
          case StrategyKind::Random: break;
        }
      }
    }

    for (SampleId id : picks) move_to_labeled(st, ds, split.target_user, id, round, false);

    // Empty band (or a batch larger than the band): random fill, logged.
    const std::size_t wanted = batch ? budget : 1;
    std::size_t draw = 0;
    while (picks.size() < wanted && !st.pool.empty()) {
      const SampleId id =
          select_random(st.pool, derive_seed(derive_seed(seed, kRandomStream, round), 1000 + draw++));
      picks.push_back(id);
      move_to_labeled(st, ds, split.target_user, id, round, true);
      log.fallback = true;
    }
    st.rounds.push_back(log);
  }

  auto final_model = train_on(st, ds, cfg, st.current_c);
  if (observer) observer(st.queries.size(), final_model);
  return ActiveResult{std::move(final_model), std::move(st)};
}

}  // namespace osval
