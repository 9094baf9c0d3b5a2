#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace osval::cli {

struct SynthArgs {
  std::string preset;
  std::optional<std::size_t> users;
  std::optional<std::size_t> dim;
  std::optional<std::size_t> genuine;
  std::optional<std::size_t> forgeries;
  std::optional<double> intra_sigma;
  std::optional<double> forgery_offset_sigma;
  std::optional<double> forgery_sigma;
  std::optional<double> inter_user_scale;
  std::optional<std::size_t> rank;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> source;
  std::string out;
};

// Every optional is "flag not given"; flags override the config file, which
// overrides the defaults.
struct RunArgs {
  std::string features;
  std::optional<std::string> config;
  std::optional<std::string> strategy;
  std::optional<std::size_t> budget;
  std::optional<std::size_t> negatives;
  std::optional<double> c;
  std::optional<std::string> kernel;
  std::optional<double> gamma;
  std::optional<std::size_t> k;
  std::optional<std::string> widen;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> seed;
  std::vector<int> users;
  bool supervised = false;
  bool curve = false;
  bool timing = false;
  std::size_t workers = 0;
  std::string out;
};

struct SweepArgs {
  std::string features;
  std::string config;
  std::string out;
  std::optional<std::size_t> seeds;
  std::size_t workers = 0;
};

struct ReportArgs {
  std::string in;
  std::string format = "table";
};

int run_synth(const SynthArgs& args);
int run_run(const RunArgs& args);
int run_sweep_cmd(const SweepArgs& args);
int run_report(const ReportArgs& args);

}  // namespace osval::cli
