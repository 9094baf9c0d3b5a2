#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "osval/active.hpp"
#include "osval/bundle.hpp"
#include "osval/error.hpp"
#include "osval/harness.hpp"
#include "osval/metrics.hpp"
#include "osval/report.hpp"
#include "osval/synth.hpp"
#include "support/qp_oracle.hpp"
#include "support/scan_oracles.hpp"
#include "support/stats.hpp"
#include "support/toy.hpp"

using namespace osval;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void print(const std::string& name, const Verdict& v, double seconds) {
  char t[32];
  std::snprintf(t, sizeof t, "%.1fs", seconds);
  std::cout << (v.pass ? "PASS " : "FAIL ") << name << "  [" << v.detail << "; " << t << "]"
            << std::endl;
  if (!v.pass) ++g_failures;
}

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int digits = 4) {
  std::ostringstream s;
  s.precision(digits);
  s << v;
  return s.str();
}

// Runs a check, turning an unexpected exception into a failure.
void criterion(const std::string& name, const std::function<Verdict()>& body) {
  const auto t0 = Clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  print(name, v, since(t0));
}

// Preparation work shared by several criteria; reported as an info line.
bool stage(const std::string& name, const std::function<std::string()>& body) {
  const auto t0 = Clock::now();
  try {
    const auto detail = body();
    std::cout << "info " << name << "  [" << detail << "; " << num(since(t0), 3) << "s]"
              << std::endl;
    return true;
  } catch (const std::exception& e) {
    std::cout << "info " << name << " failed: " << e.what() << std::endl;
    return false;
  }
}

// Worst feasibility seen over every model checked in this run.
struct FeasibilityLedger {
  std::size_t models = 0;
  std::size_t failures = 0;
  double worst_bound = 0.0;
  double worst_equality = 0.0;

  void add(const SvmModel& m) {
    const auto f = toy::feasibility(m);
    ++models;
    if (!f.ok(1e-8)) ++failures;
    worst_bound = std::max(worst_bound, f.bound_violation);
    worst_equality = std::max(worst_equality, f.equality_residual);
  }
};

FeasibilityLedger g_feasibility;

// ---------------------------------------------------------------- svm

Verdict svm_oracle_equivalence() {
  const auto t0 = Clock::now();
  const std::size_t n_instances = 200;
  std::size_t bad_objective = 0;
  std::size_t bad_decision = 0;
  std::size_t oracle_unconverged = 0;
  double worst_rel = 0.0;
  double worst_dec = 0.0;
  for (std::size_t i = 0; i < n_instances; ++i) {
    const auto p = toy::random_problem(90000 + i, i);
    const auto data = toy::to_training_set(p);
    auto cfg = toy::to_config(p);
    cfg.tol = 1e-10;
    const auto m = train(data, cfg);
    g_feasibility.add(m);
    const auto ref = oracle::solve_dual(p);
    if (ref.kkt_violation > 1e-8) ++oracle_unconverged;
    const double rel = std::abs(m.stats.dual_objective - ref.objective) /
                       std::max(1.0, std::abs(ref.objective));
    worst_rel = std::max(worst_rel, rel);
    if (rel > 1e-6) ++bad_objective;
    bool dec_ok = true;
    for (std::size_t r = 0; r < data.size(); ++r) {
      const double d = std::abs(m.decision(data.row(r)) - oracle::decision(p, ref, &p.x[r * p.dim]));
      worst_dec = std::max(worst_dec, d);
      if (d > 1e-4) dec_ok = false;
    }
    if (!dec_ok) ++bad_decision;
  }
  const double secs = since(t0);
  Verdict v;
  v.pass = bad_objective == 0 && bad_decision == 0 && oracle_unconverged == 0 && secs < 60.0;
  v.detail = std::to_string(n_instances) + " instances, worst rel objective " + num(worst_rel) +
             ", worst decision gap " + num(worst_dec) + ", oracle unconverged " +
             std::to_string(oracle_unconverged) + ", " + num(secs, 3) + "s < 60s";
  return v;
}

// ---------------------------------------------------------------- strategies

bool distance_tie(const toy::StrategyCase& c) {
  std::vector<double> a;
  for (SampleId id : c.band) a.push_back(std::abs(oracle::model_decision(c.model, c.ds.features(id))));
  const double best = *std::min_element(a.begin(), a.end());
  return std::count(a.begin(), a.end(), best) > 1;
}

bool knn_tie(const toy::StrategyCase& c, std::size_t k) {
  std::vector<double> a;
  for (SampleId id : c.band) a.push_back(oracle::scan_adis(id, c.pool, c.ds, k));
  const double best = *std::max_element(a.begin(), a.end());
  return std::count(a.begin(), a.end(), best) > 1;
}

Verdict strategy_correctness() {
  const auto t0 = Clock::now();
  const std::size_t n_pools = 150;
  std::size_t mismatches = 0;
  std::size_t ties_distance = 0;
  std::size_t ties_knn = 0;
  std::size_t knn_checks = 0;
  for (std::uint64_t seed = 0; seed < n_pools; ++seed) {
    const auto c = toy::strategy_case(7000 + seed);
    g_feasibility.add(c.model);
    if (select_distance(c.model, c.band, c.ds) != oracle::scan_distance(c.model, c.band, c.ds)) {
      ++mismatches;
    }
    // Equal |f| implies equal entropy, so distance ties are entropy ties.
    if (select_entropy(c.model, c.band, c.ds) != oracle::scan_entropy(c.model, c.band, c.ds)) {
      ++mismatches;
    }
    if (distance_tie(c)) ++ties_distance;
    for (std::size_t k : {1u, 3u, 5u}) {
      if (c.pool.size() <= k) continue;
      ++knn_checks;
      if (select_knn(c.band, c.pool, c.ds, k) != oracle::scan_knn(c.band, c.pool, c.ds, k)) {
        ++mismatches;
      }
      if (knn_tie(c, k)) ++ties_knn;
    }
  }
  const double secs = since(t0);
  Verdict v;
  v.pass = mismatches == 0 && ties_distance > 0 && ties_knn > 0 && secs < 60.0;
  v.detail = std::to_string(n_pools) + " pools (distance, entropy), " + std::to_string(knn_checks) +
             " knn pool/k checks, mismatches " + std::to_string(mismatches) +
             ", tie cases distance/entropy " + std::to_string(ties_distance) + " knn " +
             std::to_string(ties_knn) + ", " + num(secs, 3) + "s < 60s";
  return v;
}

// ---------------------------------------------------------------- band & widening

struct WidenCheck {
  std::size_t cases = 0;
  std::size_t failures = 0;
  std::size_t floor_hits = 0;

  void check(const ActiveState& st, const SvmModel& m, const Dataset& ds, const SvmConfig& cfg) {
    const auto w = widen_band(st, m, ds, cfg, 1e-3);
    g_feasibility.add(w.model);
    ++cases;
    const bool post = 3 * w.band.size() >= st.pool.size() || w.c == 1e-3;
    const bool ok = post && w.c <= st.current_c && w.retrains <= 20 &&
                    w.band == oracle::scan_band(w.model, st.pool, ds) &&
                    w.c_floor_reached == (3 * w.band.size() < st.pool.size());
    if (!ok) ++failures;
    if (w.c_floor_reached) ++floor_hits;
  }
};

ActiveState state_for(std::vector<SampleId> pos, std::vector<SampleId> neg,
                      std::vector<SampleId> pool, double c) {
  ActiveState st;
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::sort(pool.begin(), pool.end());
  st.labeled_pos = std::move(pos);
  st.labeled_neg = std::move(neg);
  st.pool = std::move(pool);
  st.current_c = c;
  return st;
}

Verdict band_and_widening(const std::vector<double>& loop_c_increases) {
  std::size_t band_cases = 0;
  std::size_t band_mismatch = 0;
  WidenCheck widen;

  // Random pools with duplicated rows.
  for (std::uint64_t seed = 0; seed < 120; ++seed) {
    const auto c = toy::strategy_case(11000 + seed);
    ++band_cases;
    if (margin_band(c.model, c.pool, c.ds) != oracle::scan_band(c.model, c.pool, c.ds)) {
      ++band_mismatch;
    }
    std::vector<SampleId> pos, neg;
    for (const auto& r : c.ds.records()) {
      if (!std::binary_search(c.pool.begin(), c.pool.end(), r.id)) {
        (r.user == 0 ? pos : neg).push_back(r.id);
      }
    }
    SvmConfig cfg;
    cfg.c = 1000;
    cfg.gamma = 0.5;
    const auto data = make_training_set(c.ds, pos, neg);
    const auto m = fit_platt(train(data, cfg), data);
    widen.check(state_for(pos, neg, c.pool, cfg.c), m, c.ds, cfg);
  }

  // Adversarial: pool far outside a hard linear margin at several scales, so
  // the band starts empty and only a small C lets it grow, or never does.
  for (int scale = 0; scale < 8; ++scale) {
    const float far = std::pow(10.0f, static_cast<float>(scale));
    std::vector<toy::Row> rows{{0, SampleKind::Genuine, {1.0f}}, {1, SampleKind::Genuine, {-1.0f}}};
    std::vector<SampleId> pool;
    for (int i = 0; i < 9; ++i) {
      rows.push_back({2, SampleKind::Genuine, {(i % 2 ? -1.0f : 1.0f) * far * (1.0f + 0.1f * i)}});
      pool.push_back(static_cast<SampleId>(rows.size() - 1));
    }
    const auto ds = toy::dataset(rows);
    SvmConfig cfg;
    cfg.kernel = KernelKind::Linear;
    const auto data = make_training_set(ds, std::vector<SampleId>{0}, std::vector<SampleId>{1});
    const auto m = train(data, cfg);
    widen.check(state_for({0}, {1}, pool, cfg.c), m, ds, cfg);
  }

  // Adversarial: rbf pool in a distant cluster where f is pinned to the bias.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> g(0.0f, 1.0f);
    std::vector<toy::Row> rows;
    std::vector<SampleId> pos, neg, pool;
    for (int i = 0; i < 6; ++i) {
      rows.push_back({0, SampleKind::Genuine, {g(rng) + 2.0f, g(rng)}});
      pos.push_back(static_cast<SampleId>(rows.size() - 1));
    }
    for (int i = 0; i < 4 + static_cast<int>(seed % 20); ++i) {
      rows.push_back({1, SampleKind::Genuine, {g(rng) - 2.0f, g(rng)}});
      neg.push_back(static_cast<SampleId>(rows.size() - 1));
    }
    for (int i = 0; i < 12; ++i) {
      rows.push_back({2, SampleKind::Genuine, {g(rng) + 40.0f, g(rng) + 40.0f}});
      pool.push_back(static_cast<SampleId>(rows.size() - 1));
    }
    const auto ds = toy::dataset(rows);
    SvmConfig cfg;
    cfg.gamma = 1.0;
    const auto data = make_training_set(ds, pos, neg);
    const auto m = fit_platt(train(data, cfg), data);
    widen.check(state_for(pos, neg, pool, cfg.c), m, ds, cfg);
  }

  const double worst_increase =
      loop_c_increases.empty() ? 0.0
                               : *std::max_element(loop_c_increases.begin(), loop_c_increases.end());
  Verdict v;
  v.pass = band_mismatch == 0 && widen.failures == 0 && widen.floor_hits > 0 && worst_increase <= 0.0;
  v.detail = std::to_string(band_cases) + " band filters, mismatches " +
             std::to_string(band_mismatch) + "; " + std::to_string(widen.cases) +
             " widenings, violations " + std::to_string(widen.failures) + ", floor reached " +
             std::to_string(widen.floor_hits) + "; C increase across " +
             std::to_string(loop_c_increases.size()) + " loops " + num(worst_increase);
  return v;
}

// ---------------------------------------------------------------- metrics

Verdict metrics_exactness() {
  struct Row {
    ConfusionCounts c;
    double p, r, a, f;
  };
  const std::vector<Row> table{
      {{3, 1, 4, 2}, 0.75, 0.6, 0.7, 2.0 / 3.0},
      {{12, 0, 12, 0}, 1.0, 1.0, 1.0, 1.0},
      {{0, 12, 0, 12}, 0.0, 0.0, 0.0, 0.0},
      {{6, 6, 6, 6}, 0.5, 0.5, 0.5, 0.5},
      {{10, 3, 9, 2}, 10.0 / 13, 10.0 / 12, 19.0 / 24, 0.8},
      {{1, 0, 0, 11}, 1.0, 1.0 / 12, 1.0 / 12, 2.0 / 13},
  };
  std::size_t bad = 0;
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12; };
  for (const auto& row : table) {
    if (!near(precision(row.c).value, row.p) || !near(recall(row.c).value, row.r) ||
        !near(accuracy(row.c).value, row.a) || !near(f1(row.c).value, row.f)) {
      ++bad;
    }
  }
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> u(0, 60);
  std::size_t bad_identity = 0;
  for (int i = 0; i < 1000; ++i) {
    const ConfusionCounts c{u(rng), u(rng), u(rng), u(rng)};
    const double p = precision(c).value;
    const double r = recall(c).value;
    const double expect = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    if (std::abs(f1(c).value - expect) > 1e-12) ++bad_identity;
  }
  return {bad == 0 && bad_identity == 0,
          std::to_string(table.size()) + " table rows, mismatches " + std::to_string(bad) +
              "; 1000 random counts, identity failures " + std::to_string(bad_identity)};
}

// ---------------------------------------------------------------- determinism & format

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

Verdict determinism_and_format(const Dataset& preset) {
  std::vector<std::string> problems;

  // Reports: same config twice, and with different worker counts.
  ProtocolConfig cfg;
  cfg.users = {0, 1, 2, 3, 4, 5};
  cfg.n_seed_repeats = 2;
  cfg.record_curve = true;
  cfg.base_seed = 11;
  const auto a = report_to_json(run_experiment(preset, cfg));
  const auto b = report_to_json(run_experiment(preset, cfg));
  cfg.workers = 1;
  const auto c = report_to_json(run_experiment(preset, cfg));
  if (a != b || a != c) problems.push_back("report bytes differ");
  if (report_to_json(report_from_json(a)) != a) problems.push_back("report round trip");

  // Bundle round trip.
  const auto dir = fs::temp_directory_path() / ("osval_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  write_bundle(preset, dir / "rt");
  const auto back = read_bundle(dir / "rt");
  if (!(back == preset) ||
      std::memcmp(back.matrix().data(), preset.matrix().data(), preset.matrix().size_bytes()) != 0) {
    problems.push_back("bundle round trip not bit-exact");
  }

  // Corrupt files, each on a fresh copy.
  SynthConfig sc;
  sc.n_users = 3;
  sc.n_genuine_per_user = 4;
  sc.n_forgery_per_user = 2;
  sc.dim = 5;
  write_bundle(generate(sc), dir / "base");
  const auto matrix = slurp(dir / "base" / kBundleMatrixFile);
  const auto manifest = slurp(dir / "base" / kBundleManifestFile);
  struct Case {
    std::string name;
    Errc code;
    std::string needle;
    std::function<void(const fs::path&)> corrupt;
  };
  auto with_matrix = [&](auto edit) {
    return [=](const fs::path& d) {
      auto m = matrix;
      edit(m);
      spit(d / kBundleMatrixFile, m);
    };
  };
  auto with_manifest = [&](auto edit) {
    return [=](const fs::path& d) {
      auto m = manifest;
      edit(m);
      spit(d / kBundleManifestFile, m);
    };
  };
  const std::size_t rows = 18;
  const std::vector<Case> cases{
      {"missing matrix", Errc::Io, std::string(kBundleMatrixFile),
       [](const fs::path& d) { fs::remove(d / kBundleMatrixFile); }},
      {"missing manifest", Errc::Io, std::string(kBundleManifestFile),
       [](const fs::path& d) { fs::remove(d / kBundleManifestFile); }},
      {"bad magic", Errc::BadMagic, "magic", with_matrix([](std::string& m) { m[1] = 'X'; })},
      {"version", Errc::VersionUnsupported, "version 7",
       with_matrix([](std::string& m) { m[4] = 7; })},
      {"truncated header", Errc::LengthMismatch, "n_samples",
       with_matrix([](std::string& m) { m.resize(12); })},
      {"truncated matrix", Errc::LengthMismatch, "matrix",
       with_matrix([](std::string& m) { m.pop_back(); })},
      {"trailing bytes", Errc::LengthMismatch, "matrix",
       with_matrix([](std::string& m) { m += "xyzw"; })},
      {"extra manifest row", Errc::ManifestMismatch, "row " + std::to_string(rows),
       with_manifest([](std::string& m) { m += "99\t0\tgenuine\tx\n"; })},
      {"short manifest", Errc::ManifestMismatch, std::to_string(rows - 1),
       with_manifest([](std::string& m) { m.erase(m.rfind('\n', m.size() - 2) + 1); })},
      {"bad kind", Errc::ManifestMismatch, "kind",
       with_manifest([](std::string& m) { m.replace(m.find("genuine"), 7, "genuinf"); })},
      {"bad id", Errc::ManifestMismatch, "row 0",
       with_manifest([](std::string& m) { m[0] = 'q'; })},
      {"non-finite", Errc::NonFinite, "row 2", with_matrix([](std::string& m) {
         const char inf[4] = {0, 0, static_cast<char>(0x80), 0x7f};
         std::copy(inf, inf + 4, m.begin() + 24 + 2 * 5 * 4 + 4);
       })},
      {"duplicate id", Errc::InvalidDataset, "duplicate",
       with_manifest([](std::string& m) { m[m.find('\n') + 1] = '0'; })},
  };
  std::size_t fired = 0;
  for (const auto& k : cases) {
    const auto d = dir / "corrupt";
    fs::remove_all(d);
    fs::create_directories(d);
    fs::copy(dir / "base", d, fs::copy_options::recursive);
    k.corrupt(d);
    try {
      (void)read_bundle(d);
      problems.push_back(k.name + ": accepted");
    } catch (const Error& e) {
      const std::string msg = e.what();
      if (e.code() != k.code || msg.find(k.needle) == std::string::npos ||
          msg.find('\n') != std::string::npos) {
        problems.push_back(k.name + ": '" + msg + "'");
      } else {
        ++fired;
      }
    }
  }
  fs::remove_all(dir);

  Verdict v;
  v.pass = problems.empty();
  v.detail = "reports identical across reruns and worker counts, bundle round trip, " +
             std::to_string(fired) + "/" + std::to_string(cases.size()) +
             " corrupt cases named";
  for (const auto& p : problems) v.detail += "; " + p;
  return v;
}

// ---------------------------------------------------------------- preset experiments

struct PerSeed {
  // [repeat] -> mean over users
  std::vector<double> f1;
  std::vector<double> genuine_fraction;
  // [budget][repeat] from recorded curves
  std::vector<std::vector<double>> f1_by_budget;
};

PerSeed per_seed(const ExperimentReport& rep, std::size_t repeats) {
  PerSeed out;
  out.f1.assign(repeats, 0.0);
  out.genuine_fraction.assign(repeats, 0.0);
  std::vector<std::size_t> count(repeats, 0);
  for (const auto& r : rep.rows) {
    out.f1[r.repeat] += r.metrics.f1;
    out.genuine_fraction[r.repeat] += r.genuine_fraction;
    ++count[r.repeat];
    for (const auto& p : r.curve) {
      if (out.f1_by_budget.size() <= p.queries) out.f1_by_budget.resize(p.queries + 1);
      auto& col = out.f1_by_budget[p.queries];
      col.resize(repeats, 0.0);
      col[r.repeat] += p.metrics.f1;
    }
  }
  for (std::size_t s = 0; s < repeats; ++s) {
    out.f1[s] /= static_cast<double>(count[s]);
    out.genuine_fraction[s] /= static_cast<double>(count[s]);
    for (auto& col : out.f1_by_budget) col[s] /= static_cast<double>(count[s]);
  }
  return out;
}

struct Fixture {
  std::uint64_t base_seed = 0;
  std::size_t repeats = 0;
  double gap_floor = 0.0;
  double supervised_gap_max = 0.0;
  SplitConfig split;
  std::size_t budget = 5;
};

Fixture load_fixture(const fs::path& dir) {
  const auto j = nlohmann::json::parse(slurp(dir / "utsig_like_pilot.json"));
  Fixture f;
  const auto& acc = j.at("acceptance");
  f.base_seed = acc.at("base_seed").get<std::uint64_t>();
  f.repeats = acc.at("n_seed_repeats").get<std::size_t>();
  f.gap_floor = acc.at("f1_gap_floor").get<double>();
  f.supervised_gap_max = acc.at("supervised_gap_max").get<double>();
  const auto& p = j.at("protocol");
  f.split.n_initial_pos = p.at("n_initial_pos").get<std::size_t>();
  f.split.n_negatives = p.at("n_negatives").get<std::size_t>();
  f.split.n_test_genuine = p.at("n_test_genuine").get<std::size_t>();
  f.split.n_test_forgery = p.at("n_test_forgery").get<std::size_t>();
  f.budget = p.at("budget").get<std::size_t>();
  return f;
}

// Every model of an active-learning loop on the preset, all strategies, one
// repeat; also collects the largest C increase between rounds.
std::vector<double> preset_loops(const Dataset& ds, const Fixture& fx) {
  std::vector<double> increases;
  SvmConfig cfg;
  for (auto kind : {StrategyKind::Distance, StrategyKind::Entropy, StrategyKind::Knn,
                    StrategyKind::Random}) {
    Strategy s;
    s.kind = kind;
    for (std::size_t u = 0; u < ds.n_users(); u += 3) {
      const auto user = static_cast<UserId>(u);
      const auto split = build_split(ds, user, fx.split, fx.base_seed);
      const auto r = run_al_loop(split, s, fx.budget, cfg, ds, fx.base_seed + u,
                                 [](std::size_t, const SvmModel& m) { g_feasibility.add(m); });
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < r.state.rounds.size(); ++i) {
        worst = std::max(worst, r.state.rounds[i].c - r.state.rounds[i - 1].c);
      }
      increases.push_back(std::max(worst, 0.0));
    }
  }
  return increases;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"osval acceptance suite"};
  std::string fixtures;
  app.add_option("--fixtures", fixtures, "Fixture directory")->required();
  CLI11_PARSE(app, argc, argv);

  Fixture fx;
  try {
    fx = load_fixture(fixtures);
  } catch (const std::exception& e) {
    std::cerr << "acceptance: cannot read fixtures: " << e.what() << '\n';
    return 2;
  }
  const auto preset_cfg = *synth_preset("utsig-like");
  const Dataset preset = generate(preset_cfg);
  std::cout << "preset utsig-like: " << preset.n_users() << " users, dim " << preset.dim()
            << "; base seed " << fx.base_seed << ", " << fx.repeats << " seeds" << std::endl;

  criterion("svm oracle equivalence", svm_oracle_equivalence);
  criterion("strategy correctness", strategy_correctness);

  std::vector<double> loop_c_increases;
  stage("active-learning loops on the preset", [&] {
    const std::size_t before = g_feasibility.models;
    loop_c_increases = preset_loops(preset, fx);
    return std::to_string(g_feasibility.models - before) + " models observed across " +
           std::to_string(loop_c_increases.size()) + " loops, every third user, 4 strategies";
  });
  criterion("band & widening", [&] { return band_and_widening(loop_c_increases); });

  ProtocolConfig base;
  base.split = fx.split;
  base.budget = fx.budget;
  base.base_seed = fx.base_seed;
  base.n_seed_repeats = fx.repeats;

  PerSeed distance, random, supervised;
  double al_seconds = 0.0;
  const bool runs_ok = stage("preset runs", [&] {
    const auto t0 = Clock::now();
    auto cfg = base;
    cfg.strategy.kind = StrategyKind::Distance;
    cfg.record_curve = true;
    distance = per_seed(run_experiment(preset, cfg), fx.repeats);
    cfg.strategy.kind = StrategyKind::Random;
    cfg.record_curve = false;
    random = per_seed(run_experiment(preset, cfg), fx.repeats);
    al_seconds = since(t0);
    supervised = per_seed(run_supervised_baseline(preset, base), fx.repeats);
    return "distance (with curves), random and supervised, " +
           std::to_string(preset.n_users()) + " users x " + std::to_string(fx.repeats) + " seeds";
  });

  criterion("AL beats random", [&] {
    if (!runs_ok) return Verdict{false, "preset runs failed"};
    const auto t = stats::paired_t(distance.f1, random.f1);
    const double gap = stats::mean(distance.f1) - stats::mean(random.f1);
    Verdict v;
    v.pass = gap > 0.0 && t.p_value < 0.05 && gap > fx.gap_floor && al_seconds < 600.0;
    v.detail = "mean F1 distance " + num(stats::mean(distance.f1)) + " vs random " +
               num(stats::mean(random.f1)) + ", gap " + num(gap) + " > floor " +
               num(fx.gap_floor) + ", paired t " + num(t.statistic) + " p " + num(t.p_value) +
               " < 0.05, runs " + num(al_seconds, 3) + "s < 600s";
    return v;
  });

  criterion("monotone budget trend", [&] {
    if (!runs_ok || distance.f1_by_budget.size() <= fx.budget) {
      return Verdict{false, "curves missing"};
    }
    std::vector<double> x, y;
    for (std::size_t b = 1; b <= fx.budget; ++b) {
      for (double f : distance.f1_by_budget[b]) {
        x.push_back(static_cast<double>(b));
        y.push_back(f);
      }
    }
    const auto rho = stats::spearman(x, y);
    bool steps_ok = true;
    std::string steps;
    for (std::size_t b = 1; b < fx.budget; ++b) {
      const auto& lo = distance.f1_by_budget[b];
      const auto& hi = distance.f1_by_budget[b + 1];
      std::vector<double> d(lo.size());
      for (std::size_t s = 0; s < lo.size(); ++s) d[s] = hi[s] - lo[s];
      const double se = stats::sample_sd(d) / std::sqrt(static_cast<double>(d.size()));
      const double step = stats::mean(d);
      if (step < -2.0 * se) steps_ok = false;
      steps += (steps.empty() ? "" : " ") + num(stats::mean(hi), 3);
    }
    Verdict v;
    v.pass = rho.statistic > 0.0 && rho.p_value < 0.05 && steps_ok;
    v.detail = "mean F1 at budgets 1..5: " + num(stats::mean(distance.f1_by_budget[1]), 3) + " " +
               steps + "; spearman rho " + num(rho.statistic) + " p " + num(rho.p_value) +
               " < 0.05; every step >= -2 SE: " + (steps_ok ? "yes" : "no");
    return v;
  });

  criterion("genuine-query bias", [&] {
    if (!runs_ok) return Verdict{false, "preset runs failed"};
    const auto t = stats::paired_t(distance.genuine_fraction, random.genuine_fraction);
    const double gap = stats::mean(distance.genuine_fraction) - stats::mean(random.genuine_fraction);
    Verdict v;
    v.pass = gap > 0.0 && t.p_value < 0.05;
    v.detail = "mean genuine fraction distance " + num(stats::mean(distance.genuine_fraction)) +
               " vs random " + num(stats::mean(random.genuine_fraction)) + ", paired t p " +
               num(t.p_value) + " < 0.05";
    return v;
  });

  criterion("supervised ceiling", [&] {
    if (!runs_ok) return Verdict{false, "preset runs failed"};
    const double sup = stats::mean(supervised.f1);
    const double al = stats::mean(distance.f1);
    Verdict v;
    v.pass = sup >= al && sup - al <= fx.supervised_gap_max;
    v.detail = "mean F1 supervised " + num(sup) + " >= distance at budget " +
               std::to_string(fx.budget) + " " + num(al) + ", gap " + num(sup - al) +
               " <= " + num(fx.supervised_gap_max);
    return v;
  });

  criterion("metrics exactness", metrics_exactness);
  criterion("determinism & format", [&] { return determinism_and_format(preset); });

  criterion("dual feasibility", [] {
    Verdict v;
    v.pass = g_feasibility.failures == 0 && g_feasibility.models > 0;
    v.detail = std::to_string(g_feasibility.models) + " models, infeasible " +
               std::to_string(g_feasibility.failures) + ", worst bound violation " +
               num(g_feasibility.worst_bound) + ", worst |sum alpha y| " +
               num(g_feasibility.worst_equality) + " (tol 1e-8)";
    return v;
  });

  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
