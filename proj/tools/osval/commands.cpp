#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "osval/osval.hpp"

namespace osval::cli {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "short write to " + path.string());
}

std::string variant_of(const Dataset& ds) {
  return ds.size() > 0 ? ds.record_at(0).source : std::string{};
}

}  // namespace

int run_synth(const SynthArgs& a) {
  SynthConfig cfg;
  if (!a.preset.empty()) {
    auto preset = synth_preset(a.preset);
    if (!preset) throw Error(Errc::InvalidArgument, "unknown preset '" + a.preset + "'");
    cfg = *preset;
  }
  if (a.users) cfg.n_users = *a.users;
  if (a.dim) cfg.dim = *a.dim;
  if (a.genuine) cfg.n_genuine_per_user = *a.genuine;
  if (a.forgeries) cfg.n_forgery_per_user = *a.forgeries;
  if (a.intra_sigma) cfg.intra_class_sigma = *a.intra_sigma;
  if (a.forgery_offset_sigma) cfg.forgery_offset_sigma = *a.forgery_offset_sigma;
  if (a.forgery_sigma) cfg.forgery_sigma = *a.forgery_sigma;
  if (a.inter_user_scale) cfg.inter_user_scale = *a.inter_user_scale;
  if (a.rank) cfg.intra_class_rank = *a.rank;
  if (a.seed) cfg.seed = *a.seed;
  if (a.source) cfg.source = *a.source;
  const auto ds = generate(cfg);
  write_bundle(ds, a.out);
  std::cerr << "wrote " << ds.size() << " samples x " << ds.dim() << " to " << a.out << '\n';
  return 0;
}

int run_run(const RunArgs& a) {
  ProtocolConfig cfg;
  if (a.config) cfg = config_from_json(read_text(*a.config), cfg);
  if (a.strategy) {
    const auto s = parse_strategy(*a.strategy);
    if (!s) throw Error(Errc::InvalidArgument, "unknown strategy '" + *a.strategy + "'");
    cfg.strategy.kind = *s;
  }
  if (a.budget) cfg.budget = *a.budget;
  if (a.negatives) cfg.split.n_negatives = *a.negatives;
  if (a.c) cfg.svm.c = *a.c;
  if (a.kernel) {
    const auto k = parse_kernel(*a.kernel);
    if (!k) throw Error(Errc::InvalidArgument, "unknown kernel '" + *a.kernel + "'");
    cfg.svm.kernel = *k;
  }
  if (a.gamma) cfg.svm.gamma = *a.gamma;
  if (a.k) cfg.strategy.k = *a.k;
  if (a.widen) {
    const auto w = parse_widen(*a.widen);
    if (!w) throw Error(Errc::InvalidArgument, "unknown widen mode '" + *a.widen + "'");
    cfg.strategy.widen = *w;
  }
  if (a.seeds) cfg.n_seed_repeats = *a.seeds;
  if (a.seed) cfg.base_seed = *a.seed;
  if (!a.users.empty()) cfg.users.assign(a.users.begin(), a.users.end());
  if (a.curve) cfg.record_curve = true;
  cfg.workers = a.workers;

  const auto ds = read_bundle(a.features);
  if (cfg.feature_variant.empty()) cfg.feature_variant = variant_of(ds);
  const auto report = a.supervised ? run_supervised_baseline(ds, cfg) : run_experiment(ds, cfg);
  write_text(a.out, report_to_json(report, a.timing));
  std::cerr << "f1 " << report.aggregates.f1.mean << "  accuracy "
            << report.aggregates.accuracy.mean << "  (" << report.aggregates.n_rows
            << " rows) -> " << a.out << '\n';
  return 0;
}

int run_sweep_cmd(const SweepArgs& a) {
  auto spec = sweep_from_json(read_text(a.config));
  if (a.seeds) spec.base.n_seed_repeats = *a.seeds;
  spec.base.workers = a.workers;
  const auto ds = read_bundle(a.features);
  if (spec.base.feature_variant.empty()) spec.base.feature_variant = variant_of(ds);

  const std::filesystem::path out = a.out;
  const auto summary = run_sweep(ds, spec, [&](const SweepCell& cell, const ExperimentReport& r) {
    write_text(out / "cells" / cell.file, report_to_json(r));
    std::cerr << cell.file << ": f1 " << r.aggregates.f1.mean << '\n';
  });
  auto index = summary;
  for (auto& cell : index.cells) cell.file = "cells/" + cell.file;
  write_text(out / "sweep.json", sweep_to_json(index));
  write_text(out / "combined.csv", sweep_combined_csv(index));
  return 0;
}

int run_report(const ReportArgs& a) {
  const auto text = read_text(a.in);
  const bool is_sweep = text.find("\"osval.sweep\"") != std::string::npos;
  if (a.format != "csv" && a.format != "table") {
    throw Error(Errc::InvalidArgument, "unknown format '" + a.format + "'");
  }
  if (is_sweep) {
    const auto summary = sweep_summary_from_json(text);
    std::cout << (a.format == "csv" ? sweep_combined_csv(summary) : sweep_table(summary));
  } else {
    const auto report = report_from_json(text);
    std::cout << (a.format == "csv" ? report_csv(report) : report_table(report));
  }
  return 0;
}

}  // namespace osval::cli
