// Command-line driver: run experiments from a config file, compare two
// summaries, list the built-in problems.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "mreo/errors.hpp"
#include "mreo/harness.hpp"
#include "mreo/problems.hpp"

namespace {

constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

void print_seed(const mreo::SeedResult& r) {
  if (!r.completed) {
    std::printf("seed %-6llu  ERROR  %s\n", static_cast<unsigned long long>(r.seed), r.error.c_str());
    return;
  }
  std::printf("seed %-6llu  best_cost %-12.6g", static_cast<unsigned long long>(r.seed), r.final_cost);
  if (r.max_rel_error) std::printf("  max_rel_err %-10.3g", *r.max_rel_error);
  std::printf("  %s  %.2fs\n", r.success ? "ok  " : "miss", r.wall_seconds);
  std::fflush(stdout);
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir, bool quiet, int jobs) {
  mreo::ExperimentConfig config;
  try {
    config = mreo::load_config(config_path);
    if (seed) mreo::override_seed(config, *seed);
    if (!out_dir.empty()) mreo::override_output_dir(config, out_dir);
    if (jobs > 0) config.jobs = jobs;
  } catch (const mreo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  mreo::RunOptions options;
  if (!quiet) options.on_seed = print_seed;
  mreo::RunSummary summary;
  try {
    summary = mreo::run_experiment(config, options);
  } catch (const mreo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << '\n';
    return kExitRunFailure;
  }

  const auto& s = summary.stats;
  if (!quiet)
    std::printf("%s on %s: %zu/%zu completed, median %.6g, success rate %.3f -> %s/summary.json\n",
                summary.algorithm.c_str(), summary.problem.c_str(), s.completed,
                summary.runs.size(), s.median, s.success_rate, config.output_dir.c_str());
  if (s.failed > 0) {
    for (const auto& r : summary.runs)
      if (!r.completed)
        std::cerr << "seed " << r.seed << " failed: " << r.error << '\n';
    return kExitRunFailure;
  }
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b) {
  try {
    std::cout << mreo::format_comparison(mreo::compare(mreo::load_summary(a), mreo::load_summary(b)));
  } catch (const mreo::Error& e) {
    std::cerr << e.what() << '\n';
    return kExitConfigError;
  }
  return 0;
}

int cmd_list_problems() {
  for (const std::string& name : mreo::problem_names()) {
    mreo::ProblemSpec spec;
    spec.name = name;
    const mreo::CostProblem p = mreo::build_problem(spec);
    std::cout << name << "\tdim " << p.dim() << "\tlower [" << p.lower.transpose() << "]\tupper ["
              << p.upper.transpose() << "]";
    if (p.optimum) std::cout << "\toptimum [" << p.optimum->transpose() << "]";
    std::cout << '\n';
  }
  return 0;
}

int cmd_export_reference(const std::string& name, const std::string& out) {
  if (name != "lorenz" && name != "chen") {
    std::cerr << "export-reference: only lorenz and chen have trajectories\n";
    return kExitConfigError;
  }
  const mreo::OscillatorSetup s = name == "lorenz" ? mreo::lorenz_setup() : mreo::chen_setup();
  const mreo::OdeModel model = name == "lorenz" ? mreo::lorenz_model() : mreo::chen_model();
  try {
    mreo::write_reference_csv(out, mreo::integrate(model, s.true_params, s.x0, 0.0, s.t_end, s.dt));
  } catch (const mreo::Error& e) {
    std::cerr << "export-reference: " << e.what() << '\n';
    return kExitRunFailure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ensemble martingale-search optimizer and benchmark harness"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run every seed of an experiment config");
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
  int jobs = 0;
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--seed-override", seed, "Run only this seed");
  run->add_option("--out", out_dir, "Output directory (overrides output_dir)");
  run->add_flag("--quiet", quiet, "Only report errors");
  run->add_option("--jobs", jobs, "Seeds to run in parallel")->check(CLI::PositiveNumber);

  auto* cmp = app.add_subcommand("compare", "Compare two summary.json files");
  std::string summary_a, summary_b;
  cmp->add_option("a", summary_a, "First summary")->required();
  cmp->add_option("b", summary_b, "Second summary")->required();

  auto* list = app.add_subcommand("list-problems", "List built-in problems");

  auto* exp = app.add_subcommand("export-reference", "Write an oscillator reference trajectory CSV");
  std::string ref_problem = "lorenz", ref_out;
  exp->add_option("--problem", ref_problem, "lorenz or chen");
  exp->add_option("--out", ref_out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }

  if (*run) return cmd_run(config_path, seed, out_dir, quiet, jobs);
  if (*cmp) return cmd_compare(summary_a, summary_b);
  if (*list) return cmd_list_problems();
  if (*exp) return cmd_export_reference(ref_problem, ref_out);
  return kExitConfigError;
}
