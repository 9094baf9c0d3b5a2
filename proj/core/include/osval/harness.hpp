#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "osval/active.hpp"
#include "osval/dataset.hpp"
#include "osval/metrics.hpp"
#include "osval/svm.hpp"

namespace osval {

struct ProtocolConfig {
  SplitConfig split;
  std::size_t budget = 5;
  Strategy strategy;
  SvmConfig svm;
  std::string feature_variant;
  std::uint64_t base_seed = 0;
  std::size_t n_seed_repeats = 1;
  // Restricts the run to these users; empty means every user in the dataset.
  std::vector<UserId> users;
  // Also evaluate the model after every round (metrics at 0..budget queries).
  bool record_curve = false;
  // Worker threads; 0 picks hardware concurrency, capped by OSVAL_WORKERS.
  std::size_t workers = 0;
};

// Seed used by repeat r of a run.
std::uint64_t repeat_seed(const ProtocolConfig& cfg, std::size_t repeat) noexcept;

struct TestMetrics {
  ConfusionCounts counts;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some 0/0 metric was reported as 0
};

// Classifies the split's test set by the sign of the decision value:
// genuine (+) against skilled forgery (-).
TestMetrics evaluate(const SvmModel& model, const UserSplit& split, const Dataset& ds);

struct CurvePoint {
  std::size_t queries = 0;
  TestMetrics metrics;
};

struct UserResult {
  UserId user = 0;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
  TestMetrics metrics;
  double genuine_fraction = 0.0;
  bool genuine_fraction_degenerate = false;
  std::size_t n_labels = 0;
  std::size_t n_positive_labels = 0;
  std::vector<QueryRecord> queries;
  std::vector<RoundLog> rounds;
  std::vector<CurvePoint> curve;
};

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single row
};

struct Aggregates {
  std::size_t n_rows = 0;
  MetricSummary accuracy;
  MetricSummary precision;
  MetricSummary recall;
  MetricSummary f1;
  MetricSummary genuine_fraction;
};

Aggregates aggregate(std::span<const UserResult> rows);

enum class RunMode : std::uint8_t { Active, Supervised };

struct ExperimentReport {
  RunMode mode = RunMode::Active;
  ProtocolConfig config;
  std::vector<UserResult> rows;  // sorted by (repeat, user)
  Aggregates aggregates;
  std::optional<double> wall_time_s;
};

// Per user x repeat: split, active-learning loop, test evaluation. Jobs run on
// a bounded worker pool and merge by (repeat, user), so the report does not
// depend on scheduling. A failing user aborts the run naming the user.
ExperimentReport run_experiment(const Dataset& ds, const ProtocolConfig& cfg);

// Same protocol, but every non-test genuine is labeled: the target user's
// remaining genuines as positives, every other user's as negatives.
ExperimentReport run_supervised_baseline(const Dataset& ds, const ProtocolConfig& cfg);

}  // namespace osval
