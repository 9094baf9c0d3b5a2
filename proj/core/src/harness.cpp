#include "osval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>

#include "osval/error.hpp"
#include "osval/random.hpp"

namespace osval {

std::uint64_t repeat_seed(const ProtocolConfig& cfg, std::size_t repeat) noexcept {
  return derive_seed(cfg.base_seed, repeat);
}

TestMetrics evaluate(const SvmModel& model, const UserSplit& split, const Dataset& ds) {
  std::vector<double> decisions;
  std::vector<int> truth;
  for (SampleId id : split.test_genuine_ids) {
    decisions.push_back(model.decision(ds.features(id)));
    truth.push_back(+1);
  }
  for (SampleId id : split.test_forgery_ids) {
    decisions.push_back(model.decision(ds.features(id)));
    truth.push_back(-1);
  }
  TestMetrics m;
  m.counts = tally(decisions, truth);
  const auto acc = accuracy(m.counts);
  const auto p = precision(m.counts);
  const auto r = recall(m.counts);
  const auto f = f1(m.counts);
  m.accuracy = acc.value;
  m.precision = p.value;
  m.recall = r.value;
  m.f1 = f.value;
  m.degenerate = acc.degenerate || p.degenerate || r.degenerate || f.degenerate;
  return m;
}

namespace {

MetricSummary summarize(std::span<const UserResult> rows, double (*get)(const UserResult&)) {
  MetricSummary s;
  if (rows.empty()) return s;
  double sum = 0.0;
  for (const auto& r : rows) sum += get(r);
  s.mean = sum / static_cast<double>(rows.size());
  if (rows.size() > 1) {
    double ss = 0.0;
    for (const auto& r : rows) ss += (get(r) - s.mean) * (get(r) - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(rows.size() - 1));
  }
  return s;
}

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("OSVAL_WORKERS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap > 0) n = std::min(n, static_cast<std::size_t>(cap));
  }
  return std::max<std::size_t>(1, std::min(n, jobs));
}

std::vector<UserId> target_users(const Dataset& ds, const ProtocolConfig& cfg) {
  if (!cfg.users.empty()) {
    auto users = cfg.users;
    std::sort(users.begin(), users.end());
    users.erase(std::unique(users.begin(), users.end()), users.end());
    return users;
  }
  std::vector<UserId> users(ds.n_users());
  for (std::size_t u = 0; u < users.size(); ++u) users[u] = static_cast<UserId>(u);
  return users;
}

using UserJob = std::function<UserResult(UserId, std::size_t)>;

// Runs every (repeat, user) job; results land at their fixed slot.
std::vector<UserResult> run_jobs(const Dataset& ds, const ProtocolConfig& cfg, const UserJob& job) {
  if (cfg.n_seed_repeats == 0) throw Error(Errc::InvalidArgument, "n_seed_repeats must be >= 1");
  const auto users = target_users(ds, cfg);
  const std::size_t n_jobs = users.size() * cfg.n_seed_repeats;
  std::vector<UserResult> rows(n_jobs);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_slot = n_jobs;
  std::exception_ptr error;

  auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= n_jobs || failed.load()) return;
      const std::size_t repeat = slot / users.size();
      const UserId user = users[slot % users.size()];
      try {
        rows[slot] = job(user, repeat);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        // Keep the lowest slot so the reported user is deterministic.
        if (slot < error_slot) {
          error_slot = slot;
          error = std::current_exception();
        }
        failed.store(true);
      }
    }
  };

  const std::size_t n_workers = worker_count(cfg.workers, n_jobs);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }

  if (error) {
    const UserId user = users[error_slot % users.size()];
    try {
      std::rethrow_exception(error);
    } catch (const Error& e) {
      throw Error(e.code(), "user " + std::to_string(user) + ": " + e.message());
    } catch (const std::exception& e) {
      throw Error(Errc::InvalidArgument, "user " + std::to_string(user) + ": " + e.what());
    }
  }
  return rows;
}

ExperimentReport finish(RunMode mode, const ProtocolConfig& cfg, std::vector<UserResult> rows,
                        std::chrono::steady_clock::time_point start) {
  ExperimentReport report;
  report.mode = mode;
  report.config = cfg;
  report.rows = std::move(rows);
  report.aggregates = aggregate(report.rows);
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace

Aggregates aggregate(std::span<const UserResult> rows) {
  Aggregates a;
  a.n_rows = rows.size();
  a.accuracy = summarize(rows, [](const UserResult& r) { return r.metrics.accuracy; });
  a.precision = summarize(rows, [](const UserResult& r) { return r.metrics.precision; });
  a.recall = summarize(rows, [](const UserResult& r) { return r.metrics.recall; });
  a.f1 = summarize(rows, [](const UserResult& r) { return r.metrics.f1; });
  a.genuine_fraction = summarize(rows, [](const UserResult& r) { return r.genuine_fraction; });
  return a;
}

ExperimentReport run_experiment(const Dataset& ds, const ProtocolConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  auto rows = run_jobs(ds, cfg, [&](UserId user, std::size_t repeat) {
    const std::uint64_t seed = repeat_seed(cfg, repeat);
    const auto split = build_split(ds, user, cfg.split, seed);

    UserResult row;
    row.user = user;
    row.repeat = repeat;
    row.seed = seed;
    RoundObserver observer;
    if (cfg.record_curve) {
      observer = [&](std::size_t queries, const SvmModel& model) {
        row.curve.push_back({queries, evaluate(model, split, ds)});
      };
    }
    auto result = run_al_loop(split, cfg.strategy, cfg.budget, cfg.svm, ds,
                              derive_seed(seed, static_cast<std::uint64_t>(user)), observer);
    row.metrics = evaluate(result.model, split, ds);
    const auto composition = query_composition(result.state, split, ds);
    row.genuine_fraction = composition.value;
    row.genuine_fraction_degenerate = composition.degenerate;
    row.n_positive_labels = result.state.labeled_pos.size();
    row.n_labels = result.state.labeled_pos.size() + result.state.labeled_neg.size();
    row.queries = std::move(result.state.queries);
    row.rounds = std::move(result.state.rounds);
    return row;
  });
  return finish(RunMode::Active, cfg, std::move(rows), start);
}

ExperimentReport run_supervised_baseline(const Dataset& ds, const ProtocolConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  auto rows = run_jobs(ds, cfg, [&](UserId user, std::size_t repeat) {
    const std::uint64_t seed = repeat_seed(cfg, repeat);
    const auto split = build_split(ds, user, cfg.split, seed);

    std::vector<SampleId> pos = split.initial_positive_ids;
    std::vector<SampleId> neg = split.initial_negative_ids;
    for (SampleId id : split.unlabeled_pool_ids) {
      (ds.record(id).user == user ? pos : neg).push_back(id);
    }
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());
    const auto data = make_training_set(ds, pos, neg);
    const auto model = train(data, cfg.svm);

    UserResult row;
    row.user = user;
    row.repeat = repeat;
    row.seed = seed;
    row.metrics = evaluate(model, split, ds);
    row.genuine_fraction_degenerate = true;
    row.n_positive_labels = pos.size();
    row.n_labels = pos.size() + neg.size();
    return row;
  });
  return finish(RunMode::Supervised, cfg, std::move(rows), start);
}

}  // namespace osval
