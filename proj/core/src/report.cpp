#include "osval/report.hpp"

#include <cstdio>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "osval/error.hpp"

namespace osval {

using Json = nlohmann::ordered_json;

std::string_view to_string(StrategyKind kind) noexcept {
  switch (kind) {
    case StrategyKind::Distance: return "distance";
    case StrategyKind::Entropy: return "entropy";
    case StrategyKind::Knn: return "knn";
    case StrategyKind::Random: return "random";
  }
  return "?";
}

std::string_view to_string(KernelKind kind) noexcept {
  return kind == KernelKind::Linear ? "linear" : "rbf";
}

std::string_view to_string(WidenMode mode) noexcept {
  switch (mode) {
    case WidenMode::Auto: return "auto";
    case WidenMode::On: return "on";
    case WidenMode::Off: return "off";
  }
  return "?";
}

std::string_view to_string(RunMode mode) noexcept {
  return mode == RunMode::Active ? "active" : "supervised";
}

std::optional<StrategyKind> parse_strategy(std::string_view s) noexcept {
  if (s == "distance") return StrategyKind::Distance;
  if (s == "entropy") return StrategyKind::Entropy;
  if (s == "knn") return StrategyKind::Knn;
  if (s == "random") return StrategyKind::Random;
  return std::nullopt;
}

std::optional<KernelKind> parse_kernel(std::string_view s) noexcept {
  if (s == "rbf") return KernelKind::Rbf;
  if (s == "linear") return KernelKind::Linear;
  return std::nullopt;
}

std::optional<WidenMode> parse_widen(std::string_view s) noexcept {
  if (s == "auto") return WidenMode::Auto;
  if (s == "on") return WidenMode::On;
  if (s == "off") return WidenMode::Off;
  return std::nullopt;
}

namespace {

std::string_view to_string(KnnScore s) noexcept {
  return s == KnnScore::PairwiseAverage ? "pairwise_average" : "anchor_sum";
}

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(Errc::Parse, "key '" + key + "': " + why);
}

template <typename T>
T get_as(const Json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const nlohmann::json::exception& e) {
    bad(key, e.what());
  }
}

void check_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  for (const auto& [k, v] : j.items()) {
    if (!allowed.contains(k)) bad(where.empty() ? k : where + "." + k, "unknown key");
  }
}

Json strategy_json(const Strategy& s) {
  return Json{{"kind", to_string(s.kind)},
              {"k", s.k},
              {"knn_score", to_string(s.knn_score)},
              {"knn_batch", s.knn_batch},
              {"widen", to_string(s.widen)},
              {"c_floor", s.c_floor}};
}

Json svm_json(const SvmConfig& c) {
  Json j{{"c", c.c}, {"kernel", to_string(c.kernel)}};
  j["gamma"] = c.gamma ? Json(*c.gamma) : Json(nullptr);
  j["class_balance"] = c.class_balance;
  j["tol"] = c.tol;
  j["max_passes"] = c.max_passes;
  return j;
}

Json config_json(const ProtocolConfig& cfg) {
  Json j;
  j["n_initial_pos"] = cfg.split.n_initial_pos;
  j["n_negatives"] = cfg.split.n_negatives;
  j["n_test_genuine"] = cfg.split.n_test_genuine;
  j["n_test_forgery"] = cfg.split.n_test_forgery;
  j["budget"] = cfg.budget;
  j["strategy"] = strategy_json(cfg.strategy);
  j["svm"] = svm_json(cfg.svm);
  j["feature_variant"] = cfg.feature_variant;
  j["base_seed"] = cfg.base_seed;
  j["n_seed_repeats"] = cfg.n_seed_repeats;
  j["users"] = cfg.users;
  j["record_curve"] = cfg.record_curve;
  return j;
}

void overlay_strategy(const Json& j, Strategy& s) {
  check_keys(j, {"kind", "k", "knn_score", "knn_batch", "widen", "c_floor"}, "strategy");
  if (j.contains("kind")) {
    const auto v = get_as<std::string>(j["kind"], "strategy.kind");
    const auto k = parse_strategy(v);
    if (!k) bad("strategy.kind", "unknown strategy '" + v + "'");
    s.kind = *k;
  }
  if (j.contains("k")) s.k = get_as<std::size_t>(j["k"], "strategy.k");
  if (j.contains("knn_score")) {
    const auto v = get_as<std::string>(j["knn_score"], "strategy.knn_score");
    if (v == "pairwise_average") s.knn_score = KnnScore::PairwiseAverage;
    else if (v == "anchor_sum") s.knn_score = KnnScore::AnchorSum;
    else bad("strategy.knn_score", "unknown score '" + v + "'");
  }
  if (j.contains("knn_batch")) s.knn_batch = get_as<bool>(j["knn_batch"], "strategy.knn_batch");
  if (j.contains("widen")) {
    const auto v = get_as<std::string>(j["widen"], "strategy.widen");
    const auto w = parse_widen(v);
    if (!w) bad("strategy.widen", "unknown mode '" + v + "'");
    s.widen = *w;
  }
  if (j.contains("c_floor")) s.c_floor = get_as<double>(j["c_floor"], "strategy.c_floor");
  if (s.kind == StrategyKind::Knn && s.k == 0) bad("strategy.k", "must be >= 1");
  if (!(s.c_floor > 0.0)) bad("strategy.c_floor", "must be positive");
}

void overlay_svm(const Json& j, SvmConfig& c) {
  check_keys(j, {"c", "kernel", "gamma", "class_balance", "tol", "max_passes"}, "svm");
  if (j.contains("c")) c.c = get_as<double>(j["c"], "svm.c");
  if (j.contains("kernel")) {
    const auto v = get_as<std::string>(j["kernel"], "svm.kernel");
    const auto k = parse_kernel(v);
    if (!k) bad("svm.kernel", "unknown kernel '" + v + "'");
    c.kernel = *k;
  }
  if (j.contains("gamma")) {
    if (j["gamma"].is_null()) c.gamma.reset();
    else c.gamma = get_as<double>(j["gamma"], "svm.gamma");
  }
  if (j.contains("class_balance")) {
    c.class_balance = get_as<bool>(j["class_balance"], "svm.class_balance");
  }
  if (j.contains("tol")) c.tol = get_as<double>(j["tol"], "svm.tol");
  if (j.contains("max_passes")) c.max_passes = get_as<std::size_t>(j["max_passes"], "svm.max_passes");
  if (!(c.c > 0.0)) bad("svm.c", "must be positive");
  if (!(c.tol > 0.0)) bad("svm.tol", "must be positive");
  if (c.gamma && !(*c.gamma > 0.0)) bad("svm.gamma", "must be positive");
  if (c.max_passes == 0) bad("svm.max_passes", "must be positive");
}

ProtocolConfig overlay_config(const Json& j, ProtocolConfig cfg) {
  check_keys(j,
             {"n_initial_pos", "n_negatives", "n_test_genuine", "n_test_forgery", "budget",
              "strategy", "svm", "feature_variant", "base_seed", "n_seed_repeats", "users",
              "record_curve"},
             "");
  auto size = [&](const char* key, std::size_t& out) {
    if (j.contains(key)) out = get_as<std::size_t>(j[key], key);
  };
  size("n_initial_pos", cfg.split.n_initial_pos);
  size("n_negatives", cfg.split.n_negatives);
  size("n_test_genuine", cfg.split.n_test_genuine);
  size("n_test_forgery", cfg.split.n_test_forgery);
  size("budget", cfg.budget);
  size("n_seed_repeats", cfg.n_seed_repeats);
  if (j.contains("strategy")) overlay_strategy(j["strategy"], cfg.strategy);
  if (j.contains("svm")) overlay_svm(j["svm"], cfg.svm);
  if (j.contains("feature_variant")) {
    cfg.feature_variant = get_as<std::string>(j["feature_variant"], "feature_variant");
  }
  if (j.contains("base_seed")) cfg.base_seed = get_as<std::uint64_t>(j["base_seed"], "base_seed");
  if (j.contains("users")) cfg.users = get_as<std::vector<UserId>>(j["users"], "users");
  if (j.contains("record_curve")) cfg.record_curve = get_as<bool>(j["record_curve"], "record_curve");
  if (cfg.n_seed_repeats == 0) bad("n_seed_repeats", "must be >= 1");
  return cfg;
}

Json parse(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(Errc::Parse, e.what());
  }
}

Json metrics_json(const TestMetrics& m) {
  return Json{{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
              {"f1", m.f1},           {"degenerate", m.degenerate}, {"tp", m.counts.tp},
              {"fp", m.counts.fp},    {"tn", m.counts.tn},         {"fn", m.counts.fn}};
}

TestMetrics metrics_from(const Json& j) {
  TestMetrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.degenerate = j.at("degenerate").get<bool>();
  m.counts.tp = j.at("tp").get<std::size_t>();
  m.counts.fp = j.at("fp").get<std::size_t>();
  m.counts.tn = j.at("tn").get<std::size_t>();
  m.counts.fn = j.at("fn").get<std::size_t>();
  return m;
}

Json summary_json(const MetricSummary& s) { return Json{{"mean", s.mean}, {"std", s.std}}; }

MetricSummary summary_from(const Json& j) {
  return {j.at("mean").get<double>(), j.at("std").get<double>()};
}

}  // namespace

std::string config_to_json(const ProtocolConfig& cfg) { return config_json(cfg).dump(2); }

ProtocolConfig config_from_json(std::string_view json, ProtocolConfig base) {
  return overlay_config(parse(json), std::move(base));
}

std::string report_to_json(const ExperimentReport& report, bool with_wall_time) {
  Json j;
  j["format"] = "osval.experiment_report";
  j["version"] = kReportVersion;
  j["mode"] = to_string(report.mode);
  j["config"] = config_json(report.config);
  const auto& a = report.aggregates;
  j["aggregates"] = Json{{"n_rows", a.n_rows},
                         {"accuracy", summary_json(a.accuracy)},
                         {"precision", summary_json(a.precision)},
                         {"recall", summary_json(a.recall)},
                         {"f1", summary_json(a.f1)},
                         {"genuine_fraction", summary_json(a.genuine_fraction)}};
  Json rows = Json::array();
  for (const auto& r : report.rows) {
    Json row;
    row["user"] = r.user;
    row["repeat"] = r.repeat;
    row["seed"] = r.seed;
    row["metrics"] = metrics_json(r.metrics);
    row["genuine_fraction"] = r.genuine_fraction;
    row["genuine_fraction_degenerate"] = r.genuine_fraction_degenerate;
    row["n_labels"] = r.n_labels;
    row["n_positive_labels"] = r.n_positive_labels;
    Json queries = Json::array();
    for (const auto& q : r.queries) {
      queries.push_back(Json{{"round", q.round}, {"id", q.id}, {"label", q.label},
                             {"fallback", q.fallback}});
    }
    row["queries"] = std::move(queries);
    Json rounds = Json::array();
    for (const auto& l : r.rounds) {
      rounds.push_back(Json{{"round", l.round},
                            {"pool_size", l.pool_size},
                            {"band_size", l.band_size},
                            {"widen_retrains", l.widen_retrains},
                            {"c", l.c},
                            {"c_floor_reached", l.c_floor_reached},
                            {"fallback", l.fallback}});
    }
    row["rounds"] = std::move(rounds);
    Json curve = Json::array();
    for (const auto& p : r.curve) {
      curve.push_back(Json{{"queries", p.queries}, {"metrics", metrics_json(p.metrics)}});
    }
    row["curve"] = std::move(curve);
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  if (with_wall_time && report.wall_time_s) j["wall_time_s"] = *report.wall_time_s;
  return j.dump(1) + "\n";
}

ExperimentReport report_from_json(std::string_view text) {
  const Json j = parse(text);
  try {
    if (j.at("format").get<std::string>() != "osval.experiment_report") {
      throw Error(Errc::Parse, "key 'format': not an experiment report");
    }
    if (j.at("version").get<int>() != kReportVersion) {
      throw Error(Errc::VersionUnsupported,
                  "report version " + std::to_string(j.at("version").get<int>()));
    }
    ExperimentReport r;
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "active") r.mode = RunMode::Active;
    else if (mode == "supervised") r.mode = RunMode::Supervised;
    else throw Error(Errc::Parse, "key 'mode': unknown mode '" + mode + "'");
    r.config = overlay_config(j.at("config"), ProtocolConfig{});
    const auto& a = j.at("aggregates");
    r.aggregates.n_rows = a.at("n_rows").get<std::size_t>();
    r.aggregates.accuracy = summary_from(a.at("accuracy"));
    r.aggregates.precision = summary_from(a.at("precision"));
    r.aggregates.recall = summary_from(a.at("recall"));
    r.aggregates.f1 = summary_from(a.at("f1"));
    r.aggregates.genuine_fraction = summary_from(a.at("genuine_fraction"));
    for (const auto& jr : j.at("rows")) {
      UserResult row;
      row.user = jr.at("user").get<UserId>();
      row.repeat = jr.at("repeat").get<std::size_t>();
      row.seed = jr.at("seed").get<std::uint64_t>();
      row.metrics = metrics_from(jr.at("metrics"));
      row.genuine_fraction = jr.at("genuine_fraction").get<double>();
      row.genuine_fraction_degenerate = jr.at("genuine_fraction_degenerate").get<bool>();
      row.n_labels = jr.at("n_labels").get<std::size_t>();
      row.n_positive_labels = jr.at("n_positive_labels").get<std::size_t>();
      for (const auto& q : jr.at("queries")) {
        row.queries.push_back({q.at("round").get<std::size_t>(), q.at("id").get<SampleId>(),
                               q.at("label").get<int>(), q.at("fallback").get<bool>()});
      }
      for (const auto& l : jr.at("rounds")) {
        RoundLog log;
        log.round = l.at("round").get<std::size_t>();
        log.pool_size = l.at("pool_size").get<std::size_t>();
        log.band_size = l.at("band_size").get<std::size_t>();
        log.widen_retrains = l.at("widen_retrains").get<std::size_t>();
        log.c = l.at("c").get<double>();
        log.c_floor_reached = l.at("c_floor_reached").get<bool>();
        log.fallback = l.at("fallback").get<bool>();
        row.rounds.push_back(log);
      }
      for (const auto& p : jr.at("curve")) {
        row.curve.push_back({p.at("queries").get<std::size_t>(), metrics_from(p.at("metrics"))});
      }
      r.rows.push_back(std::move(row));
    }
    if (j.contains("wall_time_s")) r.wall_time_s = j["wall_time_s"].get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("report: ") + e.what());
  }
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "user,repeat,seed,accuracy,precision,recall,f1,genuine_fraction,n_labels,"
         "n_positive_labels\n";
  for (const auto& r : report.rows) {
    out << r.user << ',' << r.repeat << ',' << r.seed << ',' << fmt(r.metrics.accuracy) << ','
        << fmt(r.metrics.precision) << ',' << fmt(r.metrics.recall) << ',' << fmt(r.metrics.f1)
        << ',' << fmt(r.genuine_fraction) << ',' << r.n_labels << ',' << r.n_positive_labels
        << '\n';
  }
  return out.str();
}

std::string report_table(const ExperimentReport& report) {
  std::ostringstream out;
  const auto& cfg = report.config;
  out << "mode: " << to_string(report.mode);
  if (report.mode == RunMode::Active) {
    out << "  strategy: " << to_string(cfg.strategy.kind) << "  budget: " << cfg.budget;
  }
  out << "  negatives: " << cfg.split.n_negatives << "  C: " << cfg.svm.c
      << "  kernel: " << to_string(cfg.svm.kernel) << "  repeats: " << cfg.n_seed_repeats
      << "  rows: " << report.aggregates.n_rows << '\n';
  if (!cfg.feature_variant.empty()) out << "features: " << cfg.feature_variant << '\n';

  const auto& a = report.aggregates;
  out << '\n' << std::left << std::setw(18) << "metric" << std::right << std::setw(10) << "mean"
      << std::setw(10) << "std" << '\n';
  auto line = [&](const char* name, const MetricSummary& s) {
    out << std::left << std::setw(18) << name << std::right << std::setw(10) << fmt(s.mean)
        << std::setw(10) << fmt(s.std) << '\n';
  };
  line("accuracy", a.accuracy);
  line("precision", a.precision);
  line("recall", a.recall);
  line("f1", a.f1);
  if (report.mode == RunMode::Active) line("genuine_fraction", a.genuine_fraction);

  // Per-budget means when curves were recorded.
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_budget;
  for (const auto& r : report.rows) {
    for (const auto& p : r.curve) {
      by_budget[p.queries].first.push_back(p.metrics.accuracy);
      by_budget[p.queries].second.push_back(p.metrics.f1);
    }
  }
  if (!by_budget.empty()) {
    out << '\n' << std::left << std::setw(18) << "active samples" << std::right << std::setw(10)
        << "accuracy" << std::setw(10) << "f1" << '\n';
    for (const auto& [b, v] : by_budget) {
      double acc = 0.0;
      double f = 0.0;
      for (double x : v.first) acc += x;
      for (double x : v.second) f += x;
      out << std::left << std::setw(18) << b << std::right << std::setw(10)
          << fmt(acc / static_cast<double>(v.first.size())) << std::setw(10)
          << fmt(f / static_cast<double>(v.second.size())) << '\n';
    }
  }
  return out.str();
}

}  // namespace osval
