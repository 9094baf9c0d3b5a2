#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "osval/error.hpp"

namespace {

template <typename T>
void optional_option(CLI::App* app, const std::string& name, std::optional<T>& target,
                     const std::string& help) {
  app->add_option_function<T>(name, [&target](const T& v) { target = v; }, help);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace osval::cli;

  CLI::App app{"Active-learning toolkit for writer-dependent signature verification"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Generate a synthetic feature bundle");
  s->add_option("--preset", synth.preset, "Named preset (utsig-like)");
  optional_option(s, "--users", synth.users, "Number of users");
  optional_option(s, "--dim", synth.dim, "Feature dimension");
  optional_option(s, "--genuine", synth.genuine, "Genuine samples per user");
  optional_option(s, "--forgeries", synth.forgeries, "Skilled forgeries per user");
  optional_option(s, "--intra-sigma", synth.intra_sigma, "Genuine spread");
  optional_option(s, "--forgery-offset-sigma", synth.forgery_offset_sigma,
                  "Forger mean displacement scale");
  optional_option(s, "--forgery-sigma", synth.forgery_sigma, "Forgery spread");
  optional_option(s, "--inter-user-scale", synth.inter_user_scale, "Spread of user means");
  optional_option(s, "--intra-rank", synth.rank, "Directions of within-user variation (0 = isotropic)");
  optional_option(s, "--seed", synth.seed, "Generator seed");
  optional_option(s, "--source", synth.source, "Source tag written to the manifest");
  s->add_option("--out", synth.out, "Output bundle directory")->required();

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run the per-user protocol and write a report");
  r->add_option("--features", run.features, "Feature bundle directory")->required();
  optional_option(r, "--config", run.config, "Protocol config JSON (flags take precedence)");
  optional_option(r, "--strategy", run.strategy, "distance|entropy|knn|random");
  optional_option(r, "--budget", run.budget, "Active queries per user");
  optional_option(r, "--negatives", run.negatives, "Initial random-forgery negatives");
  optional_option(r, "--c", run.c, "SVM penalty");
  optional_option(r, "--kernel", run.kernel, "rbf|linear");
  optional_option(r, "--gamma", run.gamma, "RBF gamma (default: 1/(dim*var))");
  optional_option(r, "--k", run.k, "Neighbours for the knn strategy");
  optional_option(r, "--widen", run.widen, "Margin-band widening: on|off|auto");
  optional_option(r, "--seeds", run.seeds, "Number of seed repeats");
  optional_option(r, "--seed", run.seed, "Base seed");
  r->add_option("--users", run.users, "Restrict to these user ids");
  r->add_flag("--supervised", run.supervised, "Fully supervised baseline instead of AL");
  r->add_flag("--curve", run.curve, "Record metrics after every round");
  r->add_flag("--timing", run.timing, "Write wall time into the report");
  r->add_option("--workers", run.workers, "Worker threads (0 = auto)");
  r->add_option("--out", run.out, "Report JSON path")->required();

  SweepArgs sweep;
  auto* w = app.add_subcommand("sweep", "Run a budget x strategy x negatives grid");
  w->add_option("--features", sweep.features, "Feature bundle directory")->required();
  w->add_option("--config", sweep.config, "Sweep JSON file")->required();
  w->add_option("--out", sweep.out, "Output directory")->required();
  optional_option(w, "--seeds", sweep.seeds, "Number of seed repeats");
  w->add_option("--workers", sweep.workers, "Worker threads (0 = auto)");

  ReportArgs report;
  auto* p = app.add_subcommand("report", "Render a report or sweep summary");
  p->add_option("--in", report.in, "report.json or sweep.json")->required();
  p->add_option("--format", report.format, "csv|table")
      ->check(CLI::IsMember({"csv", "table"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "osval: error: " << e.what() << '\n';
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*s) return run_synth(synth);
    if (*r) return run_run(run);
    if (*w) return run_sweep_cmd(sweep);
    if (*p) return run_report(report);
  } catch (const std::exception& e) {
    std::cerr << "osval: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
