#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "osval/harness.hpp"

namespace osval {

// budget x strategy x negatives grid over a shared base protocol.
struct SweepSpec {
  ProtocolConfig base;
  std::vector<std::size_t> budgets{1, 2, 3, 4, 5};
  std::vector<StrategyKind> strategies{StrategyKind::Distance};
  std::vector<std::size_t> negatives{228};
};

// Sweep file: {"budgets": [...], "strategies": [...], "negatives": [...],
// "base": {<protocol config keys>}}; every key optional.
SweepSpec sweep_from_json(std::string_view json, ProtocolConfig base = {});

struct SweepCell {
  StrategyKind strategy = StrategyKind::Distance;
  std::size_t negatives = 0;
  std::size_t budget = 0;
  std::string file;  // cell report name inside the sweep directory
  Aggregates aggregates;
};

struct SweepSummary {
  ProtocolConfig base;
  std::vector<SweepCell> cells;  // strategy-major, then negatives, then budget
};

// Configuration of one grid cell.
ProtocolConfig cell_config(const SweepSpec& spec, StrategyKind strategy, std::size_t negatives,
                           std::size_t budget);
std::string cell_file_name(StrategyKind strategy, std::size_t negatives, std::size_t budget);

// Runs every cell; `on_cell` receives each report as it completes.
SweepSummary run_sweep(const Dataset& ds, const SweepSpec& spec,
                       const std::function<void(const SweepCell&, const ExperimentReport&)>&
                           on_cell = {});

std::string sweep_to_json(const SweepSummary& summary);
SweepSummary sweep_summary_from_json(std::string_view json);

// One row per budget; for every (strategy, negatives) pair an accuracy and
// an f1 column holding the mean over users and repeats.
std::string sweep_combined_csv(const SweepSummary& summary);
std::string sweep_table(const SweepSummary& summary);

}  // namespace osval
