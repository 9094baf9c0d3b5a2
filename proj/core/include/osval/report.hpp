#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "osval/active.hpp"
#include "osval/harness.hpp"
#include "osval/svm.hpp"

namespace osval {

inline constexpr int kReportVersion = 1;

std::string_view to_string(StrategyKind kind) noexcept;
std::string_view to_string(KernelKind kind) noexcept;
std::string_view to_string(WidenMode mode) noexcept;
std::string_view to_string(RunMode mode) noexcept;
std::optional<StrategyKind> parse_strategy(std::string_view s) noexcept;
std::optional<KernelKind> parse_kernel(std::string_view s) noexcept;
std::optional<WidenMode> parse_widen(std::string_view s) noexcept;

// Config as JSON text. `workers` is not echoed: it never changes results.
std::string config_to_json(const ProtocolConfig& cfg);
// Overlays the keys present in `json` onto `base`. Unknown keys and bad
// values throw Errc::Parse naming the key.
ProtocolConfig config_from_json(std::string_view json, ProtocolConfig base = {});

// Versioned, self-describing report. Output is a deterministic function of the
// report; the wall-time field is written only when `with_wall_time`.
std::string report_to_json(const ExperimentReport& report, bool with_wall_time = false);
ExperimentReport report_from_json(std::string_view json);

// One line per (repeat, user) row.
std::string report_csv(const ExperimentReport& report);
// Aggregates, plus a per-budget curve table when rows carry curves.
std::string report_table(const ExperimentReport& report);

}  // namespace osval
