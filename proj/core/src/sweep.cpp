#include "osval/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

#include "osval/error.hpp"
#include "osval/report.hpp"

namespace osval {

using Json = nlohmann::ordered_json;

namespace {

Json parse(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::Parse, e.what());
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string column_prefix(StrategyKind s, std::size_t negatives) {
  return std::string(to_string(s)) + "_neg" + std::to_string(negatives);
}

}  // namespace

SweepSpec sweep_from_json(std::string_view text, ProtocolConfig base) {
  const Json j = parse(text);
  if (!j.is_object()) throw Error(Errc::Parse, "sweep file must hold an object");
  SweepSpec spec;
  spec.base = std::move(base);
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "budgets") {
        spec.budgets = value.get<std::vector<std::size_t>>();
      } else if (key == "negatives") {
        spec.negatives = value.get<std::vector<std::size_t>>();
      } else if (key == "strategies") {
        spec.strategies.clear();
        for (const auto& s : value) {
          const auto name = s.get<std::string>();
          const auto kind = parse_strategy(name);
          if (!kind) throw Error(Errc::Parse, "key 'strategies': unknown strategy '" + name + "'");
          spec.strategies.push_back(*kind);
        }
      } else if (key == "base") {
        spec.base = config_from_json(value.dump(), spec.base);
      } else {
        throw Error(Errc::Parse, "key '" + key + "': unknown key");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("sweep file: ") + e.what());
  }
  if (spec.budgets.empty() || spec.strategies.empty() || spec.negatives.empty()) {
    throw Error(Errc::Parse, "sweep grid has an empty axis");
  }
  return spec;
}

ProtocolConfig cell_config(const SweepSpec& spec, StrategyKind strategy, std::size_t negatives,
                           std::size_t budget) {
  auto cfg = spec.base;
  cfg.strategy.kind = strategy;
  cfg.split.n_negatives = negatives;
  cfg.budget = budget;
  return cfg;
}

std::string cell_file_name(StrategyKind strategy, std::size_t negatives, std::size_t budget) {
  return column_prefix(strategy, negatives) + "_b" + std::to_string(budget) + ".json";
}

SweepSummary run_sweep(const Dataset& ds, const SweepSpec& spec,
                       const std::function<void(const SweepCell&, const ExperimentReport&)>&
                           on_cell) {
  SweepSummary summary;
  summary.base = spec.base;
  for (StrategyKind s : spec.strategies) {
    for (std::size_t neg : spec.negatives) {
      for (std::size_t b : spec.budgets) {
        const auto report = run_experiment(ds, cell_config(spec, s, neg, b));
        SweepCell cell{s, neg, b, cell_file_name(s, neg, b), report.aggregates};
        if (on_cell) on_cell(cell, report);
        summary.cells.push_back(std::move(cell));
      }
    }
  }
  return summary;
}

std::string sweep_to_json(const SweepSummary& summary) {
  Json j;
  j["format"] = "osval.sweep";
  j["version"] = kReportVersion;
  j["base"] = Json::parse(config_to_json(summary.base));
  Json cells = Json::array();
  for (const auto& c : summary.cells) {
    const auto& a = c.aggregates;
    auto s = [](const MetricSummary& m) { return Json{{"mean", m.mean}, {"std", m.std}}; };
    cells.push_back(Json{{"strategy", to_string(c.strategy)},
                         {"negatives", c.negatives},
                         {"budget", c.budget},
                         {"file", c.file},
                         {"aggregates", Json{{"n_rows", a.n_rows},
                                             {"accuracy", s(a.accuracy)},
                                             {"precision", s(a.precision)},
                                             {"recall", s(a.recall)},
                                             {"f1", s(a.f1)},
                                             {"genuine_fraction", s(a.genuine_fraction)}}}});
  }
  j["cells"] = std::move(cells);
  return j.dump(1) + "\n";
}

SweepSummary sweep_summary_from_json(std::string_view text) {
  const Json j = parse(text);
  try {
    if (j.at("format").get<std::string>() != "osval.sweep") {
      throw Error(Errc::Parse, "key 'format': not a sweep summary");
    }
    if (j.at("version").get<int>() != kReportVersion) {
      throw Error(Errc::VersionUnsupported, "sweep version " +
                                                std::to_string(j.at("version").get<int>()));
    }
    SweepSummary out;
    out.base = config_from_json(j.at("base").dump());
    for (const auto& c : j.at("cells")) {
      SweepCell cell;
      const auto name = c.at("strategy").get<std::string>();
      const auto kind = parse_strategy(name);
      if (!kind) throw Error(Errc::Parse, "key 'strategy': unknown strategy '" + name + "'");
      cell.strategy = *kind;
      cell.negatives = c.at("negatives").get<std::size_t>();
      cell.budget = c.at("budget").get<std::size_t>();
      cell.file = c.at("file").get<std::string>();
      const auto& a = c.at("aggregates");
      auto s = [](const Json& m) {
        return MetricSummary{m.at("mean").get<double>(), m.at("std").get<double>()};
      };
      cell.aggregates.n_rows = a.at("n_rows").get<std::size_t>();
      cell.aggregates.accuracy = s(a.at("accuracy"));
      cell.aggregates.precision = s(a.at("precision"));
      cell.aggregates.recall = s(a.at("recall"));
      cell.aggregates.f1 = s(a.at("f1"));
      cell.aggregates.genuine_fraction = s(a.at("genuine_fraction"));
      out.cells.push_back(std::move(cell));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("sweep summary: ") + e.what());
  }
}

namespace {

struct Grid {
  std::vector<std::pair<StrategyKind, std::size_t>> columns;
  std::vector<std::size_t> budgets;
  std::map<std::tuple<std::size_t, StrategyKind, std::size_t>, const SweepCell*> cells;
};

Grid grid_of(const SweepSummary& s) {
  Grid g;
  for (const auto& c : s.cells) {
    const auto col = std::make_pair(c.strategy, c.negatives);
    if (std::find(g.columns.begin(), g.columns.end(), col) == g.columns.end()) {
      g.columns.push_back(col);
    }
    if (std::find(g.budgets.begin(), g.budgets.end(), c.budget) == g.budgets.end()) {
      g.budgets.push_back(c.budget);
    }
    g.cells[{c.budget, c.strategy, c.negatives}] = &c;
  }
  std::sort(g.budgets.begin(), g.budgets.end());
  return g;
}

}  // namespace

std::string sweep_combined_csv(const SweepSummary& summary) {
  const auto g = grid_of(summary);
  std::ostringstream out;
  out << "budget";
  for (const auto& [s, n] : g.columns) {
    out << ',' << column_prefix(s, n) << "_accuracy," << column_prefix(s, n) << "_f1";
  }
  out << '\n';
  for (std::size_t b : g.budgets) {
    out << b;
    for (const auto& [s, n] : g.columns) {
      const auto it = g.cells.find({b, s, n});
      if (it == g.cells.end()) {
        out << ",,";
      } else {
        out << ',' << fmt(it->second->aggregates.accuracy.mean) << ','
            << fmt(it->second->aggregates.f1.mean);
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string sweep_table(const SweepSummary& summary) {
  const auto g = grid_of(summary);
  std::ostringstream out;
  out << std::left << std::setw(10) << "budget";
  for (const auto& [s, n] : g.columns) {
    const auto p = column_prefix(s, n);
    out << std::right << std::setw(static_cast<int>(std::max<std::size_t>(p.size() + 4, 14)))
        << p + " acc" << std::setw(static_cast<int>(std::max<std::size_t>(p.size() + 3, 14)))
        << p + " f1";
  }
  out << '\n';
  for (std::size_t b : g.budgets) {
    out << std::left << std::setw(10) << b;
    for (const auto& [s, n] : g.columns) {
      const auto p = column_prefix(s, n);
      const auto it = g.cells.find({b, s, n});
      const std::string acc = it == g.cells.end() ? "-" : fmt(it->second->aggregates.accuracy.mean);
      const std::string f = it == g.cells.end() ? "-" : fmt(it->second->aggregates.f1.mean);
      out << std::right << std::setw(static_cast<int>(std::max<std::size_t>(p.size() + 4, 14)))
          << acc << std::setw(static_cast<int>(std::max<std::size_t>(p.size() + 3, 14))) << f;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace osval
