#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mreo/ensemble.hpp"
#include "mreo/optimizer.hpp"
#include "mreo/problems.hpp"
#include "mreo/pso.hpp"

namespace mreo {

inline constexpr int kSchemaVersion = 1;

/// Problem selector plus optional overrides. Unset fields keep the
/// built-in defaults of the named problem.
struct ProblemSpec {
  std::string name;
  /// Dimension of the analytic problems.
  Eigen::Index dim = 2;
  std::optional<Eigen::VectorXd> true_params;
  std::optional<Eigen::VectorXd> x0;
  std::optional<double> dt;
  std::optional<double> t_end;
  std::optional<Eigen::VectorXd> lower;
  std::optional<Eigen::VectorXd> upper;
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;
  /// Reference trajectory file; replaces the simulated reference.
  std::optional<std::string> reference_csv;
};

enum class Algorithm { kMreo, kPso };

struct ExperimentConfig {
  ProblemSpec problem;
  Algorithm algorithm = Algorithm::kMreo;
  AlgoConfig mreo;
  PsoConfig pso;
  std::vector<std::uint64_t> seeds;
  long iterations = 500;
  std::string output_dir = "results";
  /// Success tolerance: max relative parameter error for recovery problems,
  /// best_cost - optimum_cost otherwise.
  double tolerance = 1e-2;
  int jobs = 1;
  std::string label;
  /// Normalized form of the accepted document, used for the config hash.
  nlohmann::json document;
};

/// Validates `doc` against the schema. Errors are ConfigError and name the
/// offending path, e.g. "/algorithm/alpha".
ExperimentConfig parse_config(const nlohmann::json& doc, const std::string& base_dir = "");
/// Parses and validates a config file. Syntax errors report the byte position.
ExperimentConfig load_config(const std::string& path);

/// Parses just the algorithm options (without "name"), as found under
/// "/algorithm", and validates them. Errors are ConfigError.
AlgoConfig parse_mreo_options(const nlohmann::json& options, Eigen::Index dim);
PsoConfig parse_pso_options(const nlohmann::json& options);

/// Replaces the seed list with a single seed.
void override_seed(ExperimentConfig& config, std::uint64_t seed);
void override_output_dir(ExperimentConfig& config, const std::string& dir);

/// FNV-1a 64 of the normalized document (without the job count), as hex.
std::string config_hash(const ExperimentConfig& config);

CostProblem build_problem(const ProblemSpec& spec);
/// Names accepted by `build_problem`.
std::vector<std::string> problem_names();

/// Outcome of one seed.
struct SeedResult {
  std::uint64_t seed = 0;
  bool completed = false;
  std::string error;
  double final_cost = 0.0;
  Eigen::VectorXd best_params;
  std::optional<double> max_rel_error;
  bool success = false;
  /// First trace iteration meeting the success tolerance.
  std::optional<long> iterations_to_threshold;
  std::size_t evaluations = 0;
  double wall_seconds = 0.0;
};

struct Aggregates {
  std::size_t completed = 0;
  std::size_t failed = 0;
  double mean = 0.0;
  double median = 0.0;
  double std = 0.0;
  double success_rate = 0.0;
};

/// Statistics of final_cost over the completed seeds; success_rate is over
/// all seeds, counting failed runs as unsuccessful.
Aggregates aggregate(const std::vector<SeedResult>& runs);

struct RunSummary {
  int schema_version = kSchemaVersion;
  std::string label;
  std::string problem;
  std::string algorithm;
  long iterations = 0;
  Eigen::Index population = 0;
  Eigen::Index dim = 0;
  double tolerance = 0.0;
  std::string config_hash;
  nlohmann::json config;
  std::vector<SeedResult> runs;
  Aggregates stats;
};

nlohmann::json to_json(const RunSummary& summary);
RunSummary summary_from_json(const nlohmann::json& doc);
RunSummary load_summary(const std::string& path);

/// Maximum over coordinates of |x - x*| / |x*| (absolute where x* is 0).
double max_relative_error(const Eigen::VectorXd& x, const Eigen::VectorXd& reference);

/// Writes the trace CSV; `dim` fixes the number of best_param columns.
void write_trace_csv(std::ostream& out, const Trace& trace, Eigen::Index dim);

/// Runs one seed of the configured algorithm on an already built problem.
RunResult run_seed(const ExperimentConfig& config, const CostProblem& problem, std::uint64_t seed);

/// Scores a finished run against the problem's optimum and tolerance.
SeedResult score_run(const CostProblem& problem, const RunResult& result, double tolerance);

struct RunOptions {
  /// Called once per finished seed, serialized across workers.
  std::function<void(const SeedResult&)> on_seed;
  bool write_files = true;
};

/// Runs every seed (up to `config.jobs` at once), writes
/// `trace_seed_<seed>.csv` per completed seed and `summary.json` into the
/// output directory. Per-seed failures are recorded, not thrown.
RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct ComparisonSide {
  std::string label;
  std::string algorithm;
  double median = 0.0;
  double success_rate = 0.0;
  std::optional<double> median_iterations_to_threshold;
  std::size_t completed = 0;
};

struct Comparison {
  std::string problem;
  long iterations = 0;
  Eigen::Index population = 0;
  ComparisonSide a;
  ComparisonSide b;
  std::size_t shared_seeds = 0;
  std::size_t wins_a = 0;
  std::size_t wins_b = 0;
  std::size_t ties = 0;
  /// b minus a.
  double median_delta = 0.0;
  double success_delta = 0.0;
};

/// Side-by-side report over the seeds both summaries ran. Throws
/// InvalidComparison unless problem, budget, dimension and tolerance match.
Comparison compare(const RunSummary& a, const RunSummary& b);
std::string format_comparison(const Comparison& c);

}  // namespace mreo
