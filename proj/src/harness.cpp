#include "mreo/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>
#include <utility>

#include "mreo/errors.hpp"

namespace mreo {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads one JSON object and remembers which keys were consumed, so that
// anything left over can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "/" : path_, "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }

  const json& raw(const std::string& key) {
    if (!has(key)) fail(at(key), "required field is missing");
    return j_.at(key);
  }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) fail(at(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(at(key), "expected a finite number");
    return x;
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  std::optional<double> maybe_number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return number(key);
  }

  long long integer(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number_integer()) fail(at(key), "expected an integer");
    return v.get<long long>();
  }

  long long integer(const std::string& key, long long fallback) {
    return has(key) ? integer(key) : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(at(key), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) fail(at(key), "expected a string");
    return v.get<std::string>();
  }

  std::optional<Eigen::VectorXd> maybe_vector(const std::string& key) {
    if (!has(key)) return std::nullopt;
    return vector_at(j_.at(key), at(key));
  }

  template <typename E>
  E choice(const std::string& key, const std::vector<std::pair<std::string, E>>& options, E fallback) {
    if (!has(key)) return fallback;
    const std::string s = string(key);
    for (const auto& [name, value] : options)
      if (name == s) return value;
    std::string list;
    for (const auto& o : options) list += (list.empty() ? "" : ", ") + o.first;
    fail(at(key), "unknown value \"" + s + "\" (expected one of " + list + ")");
  }

  void finish() const {
    for (const auto& item : j_.items())
      if (!seen_.count(item.key())) fail(at(item.key()), "unknown key");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
  }

  static Eigen::VectorXd vector_at(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) fail(path + "/" + std::to_string(k), "expected a number");
      out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
      if (!std::isfinite(out(static_cast<Eigen::Index>(k))))
        fail(path + "/" + std::to_string(k), "expected a finite number");
    }
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const std::vector<std::pair<std::string, BetaSchedule>> kBetaNames = {
    {"pseudo_code", BetaSchedule::kPseudoCode}, {"exponential", BetaSchedule::kExponential}};
const std::vector<std::pair<std::string, SelectionMode>> kSelectionNames = {
    {"greedy_min", SelectionMode::kGreedyMin},
    {"literal_paper", SelectionMode::kKeepNonDecreasing},
    {"always_accept", SelectionMode::kAlwaysAccept}};
const std::vector<std::pair<std::string, Variant>> kVariantNames = {
    {"no_prediction", Variant::kNoPrediction}, {"with_prediction", Variant::kWithPrediction}};
const std::vector<std::pair<std::string, IncrementForm>> kIncrementNames = {
    {"extremal_drift", IncrementForm::kExtremalDrift},
    {"innovation_difference", IncrementForm::kInnovationDifference}};
const std::vector<std::pair<std::string, FunctionalForm>> kFunctionalNames = {
    {"innovation", FunctionalForm::kInnovation}, {"observation", FunctionalForm::kObservation}};
const std::vector<std::pair<std::string, CovarianceForm>> kCovarianceNames = {
    {"centered", CovarianceForm::kCentered}, {"time_differenced", CovarianceForm::kTimeDifferenced}};
const std::vector<std::pair<std::string, ExtremalMode>> kExtremalNames = {
    {"running_best", ExtremalMode::kRunningBest}, {"iteration_best", ExtremalMode::kIterationBest}};

bool is_oscillator(const std::string& name) { return name == "lorenz" || name == "chen"; }

ProblemSpec parse_problem(const json& j, const std::string& base_dir) {
  ObjectReader r(j, "/problem");
  ProblemSpec p;
  p.name = r.string("name");
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), p.name) == names.end())
    ObjectReader::fail(r.at("name"), "unknown problem \"" + p.name + "\"");

  p.lower = r.maybe_vector("lower");
  p.upper = r.maybe_vector("upper");
  if (is_oscillator(p.name)) {
    p.true_params = r.maybe_vector("true_params");
    p.x0 = r.maybe_vector("x0");
    p.dt = r.maybe_number("dt");
    p.t_end = r.maybe_number("t_end");
    p.noise_std = r.number("noise_std", 0.0);
    p.noise_seed = static_cast<std::uint64_t>(r.integer("noise_seed", 0));
    if (r.has("reference_csv")) {
      fs::path ref = r.string("reference_csv");
      if (ref.is_relative() && !base_dir.empty()) ref = fs::path(base_dir) / ref;
      p.reference_csv = ref.string();
    }
    if (p.true_params && p.true_params->size() != 3)
      ObjectReader::fail(r.at("true_params"), "expected 3 entries");
    if (p.x0 && p.x0->size() != 3) ObjectReader::fail(r.at("x0"), "expected 3 entries");
    if (p.dt && !(*p.dt > 0.0)) ObjectReader::fail(r.at("dt"), "must be positive");
    if (p.t_end && !(*p.t_end > 0.0)) ObjectReader::fail(r.at("t_end"), "must be positive");
    if (p.noise_std < 0.0) ObjectReader::fail(r.at("noise_std"), "must be non-negative");
    p.dim = 3;
  } else {
    const long long dim = r.integer("dim", 2);
    if (dim < 1) ObjectReader::fail(r.at("dim"), "must be at least 1");
    p.dim = static_cast<Eigen::Index>(dim);
  }
  if (p.lower && p.lower->size() != p.dim)
    ObjectReader::fail(r.at("lower"), "expected " + std::to_string(p.dim) + " entries");
  if (p.upper && p.upper->size() != p.dim)
    ObjectReader::fail(r.at("upper"), "expected " + std::to_string(p.dim) + " entries");
  r.finish();
  return p;
}

void parse_mreo(ObjectReader& r, AlgoConfig& c, Eigen::Index dim) {
  c.ensemble_size = static_cast<Eigen::Index>(r.integer("ensemble_size", c.ensemble_size));
  c.alpha = r.number("alpha", c.alpha);
  c.beta_schedule = r.choice("beta_schedule", kBetaNames, c.beta_schedule);
  c.beta_max = r.number("beta_max", c.beta_max);
  if (r.has("beta_kappa")) c.beta_kappa = static_cast<long>(r.integer("beta_kappa"));
  c.rho = r.maybe_number("rho");
  c.rho_scale = r.number("rho_scale", c.rho_scale);
  c.rho_c = r.maybe_vector("rho_c");
  c.rho_c_scale = r.number("rho_c_scale", c.rho_c_scale);
  if (r.has("g")) {
    // Either a diagonal (array of numbers) or a full matrix (array of rows).
    const json& g = r.raw("g");
    if (g.is_array() && !g.empty() && g[0].is_array()) {
      Eigen::MatrixXd m(static_cast<Eigen::Index>(g.size()), dim);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const Eigen::VectorXd row = ObjectReader::vector_at(g[i], r.at("g") + "/" + std::to_string(i));
        if (row.size() != dim)
          ObjectReader::fail(r.at("g") + "/" + std::to_string(i), "expected " + std::to_string(dim) + " entries");
        m.row(static_cast<Eigen::Index>(i)) = row.transpose();
      }
      c.g = m;
    } else {
      c.g = Eigen::MatrixXd(ObjectReader::vector_at(g, r.at("g")).asDiagonal());
    }
  }
  c.g_scale = r.number("g_scale", c.g_scale);
  c.tau0 = r.number("tau0", c.tau0);
  c.delta_tau = r.number("delta_tau", c.delta_tau);
  c.selection = r.choice("selection", kSelectionNames, c.selection);
  c.variant = r.choice("variant", kVariantNames, c.variant);
  c.increment = r.choice("increment", kIncrementNames, c.increment);
  c.functional = r.choice("functional", kFunctionalNames, c.functional);
  c.covariance = r.choice("covariance", kCovarianceNames, c.covariance);
  c.extremal = r.choice("extremal", kExtremalNames, c.extremal);
  c.derangement = r.boolean("derangement", c.derangement);
  c.clip_to_box = r.boolean("clip_to_box", c.clip_to_box);
  c.stagnation_window = static_cast<long>(r.integer("stagnation_window", c.stagnation_window));
}

void parse_pso(ObjectReader& r, PsoConfig& c) {
  c.swarm_size = static_cast<Eigen::Index>(r.integer("swarm_size", c.swarm_size));
  c.params.w = r.number("w", c.params.w);
  c.params.c1 = r.number("c1", c.params.c1);
  c.params.c2 = r.number("c2", c.params.c2);
  c.params.velocity_clamp = r.number("velocity_clamp", c.params.velocity_clamp);
  c.params.clip_to_box = r.boolean("clip_to_box", c.params.clip_to_box);
}

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string algorithm_name(Algorithm a) { return a == Algorithm::kMreo ? "mreo" : "pso"; }

}  // namespace

std::vector<std::string> problem_names() {
  return {"lorenz", "chen", "sphere", "rastrigin", "rosenbrock", "ackley"};
}

ExperimentConfig parse_config(const json& doc, const std::string& base_dir) {
  ObjectReader r(doc, "");
  ExperimentConfig c;
  const long long version = r.integer("schema_version");
  if (version != kSchemaVersion)
    ObjectReader::fail("/schema_version", "unsupported version " + std::to_string(version) +
                                              " (expected " + std::to_string(kSchemaVersion) + ")");
  c.problem = parse_problem(r.raw("problem"), base_dir);

  ObjectReader a(r.raw("algorithm"), "/algorithm");
  const std::string name = a.string("name");
  if (name == "mreo") {
    c.algorithm = Algorithm::kMreo;
    parse_mreo(a, c.mreo, c.problem.dim);
  } else if (name == "pso") {
    c.algorithm = Algorithm::kPso;
    parse_pso(a, c.pso);
  } else {
    ObjectReader::fail("/algorithm/name", "unknown algorithm \"" + name + "\" (expected mreo or pso)");
  }
  a.finish();

  const json& seeds = r.raw("seeds");
  if (!seeds.is_array()) ObjectReader::fail("/seeds", "expected an array of integers");
  if (seeds.empty()) ObjectReader::fail("/seeds", "seed list is empty");
  std::set<std::uint64_t> unique;
  for (std::size_t k = 0; k < seeds.size(); ++k) {
    const std::string path = "/seeds/" + std::to_string(k);
    if (!seeds[k].is_number_integer() || seeds[k].get<long long>() < 0)
      ObjectReader::fail(path, "expected a non-negative integer");
    const auto s = seeds[k].get<std::uint64_t>();
    if (!unique.insert(s).second) ObjectReader::fail(path, "duplicate seed " + std::to_string(s));
    c.seeds.push_back(s);
  }

  const long long iterations = r.integer("iterations");
  if (iterations < 0) ObjectReader::fail("/iterations", "must be non-negative");
  c.iterations = static_cast<long>(iterations);
  c.mreo.max_iterations = c.iterations;
  c.pso.max_iterations = c.iterations;

  if (r.has("output_dir")) c.output_dir = r.string("output_dir");
  c.tolerance = r.number("tolerance", c.tolerance);
  if (!(c.tolerance > 0.0)) ObjectReader::fail("/tolerance", "must be positive");
  const long long jobs = r.integer("jobs", 1);
  if (jobs < 1) ObjectReader::fail("/jobs", "must be at least 1");
  c.jobs = static_cast<int>(jobs);
  if (r.has("label")) c.label = r.string("label");
  r.finish();

  try {
    if (c.algorithm == Algorithm::kMreo)
      c.mreo.validate(c.problem.dim);
    else
      c.pso.validate();
  } catch (const InvalidParameter& e) {
    ObjectReader::fail("/algorithm", e.what());
  }
  if (c.problem.lower && c.problem.upper &&
      (c.problem.lower->array() > c.problem.upper->array()).any())
    ObjectReader::fail("/problem", "lower bound exceeds upper bound");

  c.document = doc;
  return c;
}

AlgoConfig parse_mreo_options(const json& options, Eigen::Index dim) {
  ObjectReader r(options, "/algorithm");
  AlgoConfig c;
  parse_mreo(r, c, dim);
  r.finish();
  try {
    c.validate(dim);
  } catch (const InvalidParameter& e) {
    ObjectReader::fail("/algorithm", e.what());
  }
  return c;
}

PsoConfig parse_pso_options(const json& options) {
  ObjectReader r(options, "/algorithm");
  PsoConfig c;
  parse_pso(r, c);
  r.finish();
  try {
    c.validate();
  } catch (const InvalidParameter& e) {
    ObjectReader::fail("/algorithm", e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": syntax error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  const fs::path parent = fs::path(path).parent_path();
  try {
    return parse_config(doc, parent.string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void override_seed(ExperimentConfig& config, std::uint64_t seed) {
  config.seeds = {seed};
  config.document["seeds"] = json::array({seed});
}

void override_output_dir(ExperimentConfig& config, const std::string& dir) {
  config.output_dir = dir;
  config.document["output_dir"] = dir;
}

std::string config_hash(const ExperimentConfig& config) {
  json doc = config.document;
  doc.erase("jobs");
  const std::string text = doc.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return "fnv1a64:" + to_hex(h);
}

CostProblem build_problem(const ProblemSpec& spec) {
  CostProblem p;
  if (is_oscillator(spec.name)) {
    OscillatorSetup s = spec.name == "lorenz" ? lorenz_setup() : chen_setup();
    if (spec.true_params) s.true_params = *spec.true_params;
    if (spec.x0) s.x0 = *spec.x0;
    if (spec.dt) s.dt = *spec.dt;
    if (spec.t_end) s.t_end = *spec.t_end;
    if (spec.lower) s.lower = *spec.lower;
    if (spec.upper) s.upper = *spec.upper;
    s.noise_std = spec.noise_std;
    s.noise_seed = spec.noise_seed;
    if (spec.reference_csv) {
      auto ref = read_reference_csv(*spec.reference_csv);
      ref.true_params = spec.true_params;
      ref = with_measurement_noise(std::move(ref), s.noise_std, s.noise_seed);
      const OdeModel model = spec.name == "lorenz" ? lorenz_model() : chen_model();
      return recovery_problem(spec.name, model,
                              std::make_shared<const ReferenceTrajectory>(std::move(ref)), s.lower,
                              s.upper);
    }
    return spec.name == "lorenz" ? lorenz_problem(s) : chen_problem(s);
  }
  if (spec.name == "sphere")
    p = sphere(spec.dim);
  else if (spec.name == "rastrigin")
    p = rastrigin(spec.dim);
  else if (spec.name == "rosenbrock")
    p = rosenbrock(spec.dim);
  else if (spec.name == "ackley")
    p = ackley(spec.dim);
  else
    throw ConfigError("/problem/name: unknown problem \"" + spec.name + "\"");
  if (spec.lower) p.lower = *spec.lower;
  if (spec.upper) p.upper = *spec.upper;
  return p;
}

double max_relative_error(const Eigen::VectorXd& x, const Eigen::VectorXd& reference) {
  if (x.size() != reference.size())
    throw InvalidArgument("max_relative_error: size mismatch");
  double worst = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double diff = std::abs(x(k) - reference(k));
    worst = std::max(worst, reference(k) != 0.0 ? diff / std::abs(reference(k)) : diff);
  }
  return worst;
}

void write_trace_csv(std::ostream& out, const Trace& trace, Eigen::Index dim) {
  out << "iteration,tau,best_cost,mean_cost,spread,beta,gain_norm,l_index";
  for (Eigen::Index k = 1; k <= dim; ++k) out << ",best_param_" << k;
  out << '\n';
  for (const TraceRecord& r : trace) {
    out << r.iteration << ',' << fmt(r.tau) << ',' << fmt(r.best_cost) << ',' << fmt(r.mean_cost)
        << ',' << fmt(r.spread) << ',' << fmt(r.beta) << ',' << fmt(r.gain_norm) << ','
        << r.l_index;
    for (Eigen::Index k = 0; k < dim; ++k)
      out << ',' << (k < r.best_point.size() ? fmt(r.best_point(k)) : std::string("nan"));
    out << '\n';
  }
}

RunResult run_seed(const ExperimentConfig& config, const CostProblem& problem, std::uint64_t seed) {
  if (config.algorithm == Algorithm::kMreo) {
    AlgoConfig c = config.mreo;
    c.seed = seed;
    c.max_iterations = config.iterations;
    return run(problem, c);
  }
  PsoConfig c = config.pso;
  c.seed = seed;
  c.max_iterations = config.iterations;
  return pso_run(problem, c);
}

SeedResult score_run(const CostProblem& problem, const RunResult& result, double tolerance) {
  SeedResult s;
  s.completed = true;
  s.final_cost = result.extremal.best_cost;
  s.best_params = result.extremal.best_point;
  s.evaluations = result.evaluations;
  auto meets = [&](double cost, const Eigen::VectorXd& point) {
    if (problem.parameter_recovery && problem.optimum)
      return max_relative_error(point, *problem.optimum) <= tolerance;
    return cost - problem.optimum_cost <= tolerance;
  };
  if (problem.parameter_recovery && problem.optimum)
    s.max_rel_error = max_relative_error(s.best_params, *problem.optimum);
  s.success = meets(s.final_cost, s.best_params);
  for (const TraceRecord& r : result.trace)
    if (meets(r.best_cost, r.best_point)) {
      s.iterations_to_threshold = r.iteration;
      break;
    }
  return s;
}

Aggregates aggregate(const std::vector<SeedResult>& runs) {
  Aggregates a;
  std::vector<double> costs;
  std::size_t successes = 0;
  for (const SeedResult& r : runs) {
    if (!r.completed) {
      ++a.failed;
      continue;
    }
    costs.push_back(r.final_cost);
    successes += r.success ? 1 : 0;
  }
  a.completed = costs.size();
  if (!runs.empty()) a.success_rate = static_cast<double>(successes) / static_cast<double>(runs.size());
  if (costs.empty()) return a;
  a.mean = std::accumulate(costs.begin(), costs.end(), 0.0) / static_cast<double>(costs.size());
  a.median = median_of(costs);
  if (costs.size() > 1) {
    double ss = 0.0;
    for (double c : costs) ss += (c - a.mean) * (c - a.mean);
    a.std = std::sqrt(ss / static_cast<double>(costs.size() - 1));
  }
  return a;
}

RunSummary run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const CostProblem problem = build_problem(config.problem);
  const fs::path out_dir(config.output_dir);
  if (options.write_files) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());
  }

  std::vector<SeedResult> results(config.seeds.size());
  std::atomic<std::size_t> next{0};
  std::mutex report;

  auto worker = [&] {
    for (std::size_t k = next++; k < config.seeds.size(); k = next++) {
      const std::uint64_t seed = config.seeds[k];
      SeedResult s;
      const auto start = std::chrono::steady_clock::now();
      try {
        const RunResult result = run_seed(config, problem, seed);
        s = score_run(problem, result, config.tolerance);
        if (options.write_files) {
          const fs::path file = out_dir / ("trace_seed_" + std::to_string(seed) + ".csv");
          std::ofstream out(file);
          write_trace_csv(out, result.trace, problem.dim());
          if (!out) throw Error("cannot write " + file.string());
        }
      } catch (const std::exception& e) {
        s = SeedResult{};
        s.error = e.what();
      }
      s.seed = seed;
      s.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      results[k] = s;
      if (options.on_seed) {
        std::lock_guard<std::mutex> lock(report);
        options.on_seed(results[k]);
      }
    }
  };

  const std::size_t jobs =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, config.jobs)), config.seeds.size());
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  RunSummary summary;
  summary.label = config.label;
  summary.problem = problem.name;
  summary.algorithm = algorithm_name(config.algorithm);
  summary.iterations = config.iterations;
  summary.population =
      config.algorithm == Algorithm::kMreo ? config.mreo.ensemble_size : config.pso.swarm_size;
  summary.dim = problem.dim();
  summary.tolerance = config.tolerance;
  summary.config_hash = config_hash(config);
  summary.config = config.document;
  summary.runs = std::move(results);
  summary.stats = aggregate(summary.runs);

  if (options.write_files) {
    const fs::path file = out_dir / "summary.json";
    std::ofstream out(file);
    out << to_json(summary).dump(2) << '\n';
    if (!out) throw Error("cannot write " + file.string());
  }
  return summary;
}

json to_json(const RunSummary& s) {
  json runs = json::array();
  for (const SeedResult& r : s.runs) {
    json row;
    row["seed"] = r.seed;
    row["status"] = r.completed ? "ok" : "error";
    row["error"] = r.completed ? json(nullptr) : json(r.error);
    row["final_cost"] = r.completed ? json(r.final_cost) : json(nullptr);
    row["best_params"] = r.completed ? vector_json(r.best_params) : json(nullptr);
    row["max_rel_error"] = r.max_rel_error ? json(*r.max_rel_error) : json(nullptr);
    row["success"] = r.success;
    row["iterations_to_threshold"] =
        r.iterations_to_threshold ? json(*r.iterations_to_threshold) : json(nullptr);
    row["evaluations"] = r.evaluations;
    row["wall_seconds"] = r.wall_seconds;
    runs.push_back(std::move(row));
  }
  json doc;
  doc["schema_version"] = s.schema_version;
  doc["label"] = s.label;
  doc["problem"] = s.problem;
  doc["algorithm"] = s.algorithm;
  doc["iterations"] = s.iterations;
  doc["population"] = s.population;
  doc["dim"] = s.dim;
  doc["tolerance"] = s.tolerance;
  doc["config_hash"] = s.config_hash;
  doc["config"] = s.config;
  doc["runs"] = std::move(runs);
  doc["aggregate"] = {{"completed", s.stats.completed}, {"failed", s.stats.failed},
                      {"mean", s.stats.mean},           {"median", s.stats.median},
                      {"std", s.stats.std},             {"success_rate", s.stats.success_rate}};
  return doc;
}

RunSummary summary_from_json(const json& doc) {
  try {
    RunSummary s;
    s.schema_version = doc.at("schema_version").get<int>();
    if (s.schema_version != kSchemaVersion)
      throw ConfigError("summary: unsupported schema_version " + std::to_string(s.schema_version));
    s.label = doc.value("label", "");
    s.problem = doc.at("problem").get<std::string>();
    s.algorithm = doc.at("algorithm").get<std::string>();
    s.iterations = doc.at("iterations").get<long>();
    s.population = doc.at("population").get<Eigen::Index>();
    s.dim = doc.at("dim").get<Eigen::Index>();
    s.tolerance = doc.at("tolerance").get<double>();
    s.config_hash = doc.at("config_hash").get<std::string>();
    s.config = doc.value("config", json::object());
    for (const json& row : doc.at("runs")) {
      SeedResult r;
      r.seed = row.at("seed").get<std::uint64_t>();
      r.completed = row.at("status").get<std::string>() == "ok";
      if (!row.at("error").is_null()) r.error = row.at("error").get<std::string>();
      if (r.completed) {
        r.final_cost = row.at("final_cost").get<double>();
        const auto params = row.at("best_params").get<std::vector<double>>();
        r.best_params = Eigen::Map<const Eigen::VectorXd>(params.data(),
                                                          static_cast<Eigen::Index>(params.size()));
      }
      if (!row.at("max_rel_error").is_null()) r.max_rel_error = row.at("max_rel_error").get<double>();
      r.success = row.at("success").get<bool>();
      if (!row.at("iterations_to_threshold").is_null())
        r.iterations_to_threshold = row.at("iterations_to_threshold").get<long>();
      r.evaluations = row.at("evaluations").get<std::size_t>();
      r.wall_seconds = row.at("wall_seconds").get<double>();
      s.runs.push_back(std::move(r));
    }
    s.stats = aggregate(s.runs);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("summary: ") + e.what());
  }
}

RunSummary load_summary(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open summary file");
  try {
    return summary_from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": syntax error at byte " + std::to_string(e.byte));
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

namespace {

ComparisonSide side_of(const RunSummary& s) {
  ComparisonSide out;
  out.label = s.label.empty() ? s.algorithm : s.label;
  out.algorithm = s.algorithm;
  out.median = s.stats.median;
  out.success_rate = s.stats.success_rate;
  out.completed = s.stats.completed;
  std::vector<double> hits;
  for (const SeedResult& r : s.runs)
    if (r.iterations_to_threshold) hits.push_back(static_cast<double>(*r.iterations_to_threshold));
  if (!hits.empty()) out.median_iterations_to_threshold = median_of(hits);
  return out;
}

}  // namespace

Comparison compare(const RunSummary& a, const RunSummary& b) {
  if (a.problem != b.problem)
    throw InvalidComparison("compare: problems differ (" + a.problem + " vs " + b.problem + ")");
  if (a.dim != b.dim) throw InvalidComparison("compare: dimensions differ");
  if (a.iterations != b.iterations || a.population != b.population)
    throw InvalidComparison("compare: evaluation budgets differ (" + std::to_string(a.population) +
                            " x " + std::to_string(a.iterations) + " vs " +
                            std::to_string(b.population) + " x " + std::to_string(b.iterations) + ")");
  if (a.tolerance != b.tolerance) throw InvalidComparison("compare: success tolerances differ");

  Comparison c;
  c.problem = a.problem;
  c.iterations = a.iterations;
  c.population = a.population;
  c.a = side_of(a);
  c.b = side_of(b);
  c.median_delta = c.b.median - c.a.median;
  c.success_delta = c.b.success_rate - c.a.success_rate;

  std::map<std::uint64_t, const SeedResult*> by_seed;
  for (const SeedResult& r : b.runs) by_seed[r.seed] = &r;
  for (const SeedResult& ra : a.runs) {
    const auto it = by_seed.find(ra.seed);
    if (it == by_seed.end()) continue;
    const SeedResult& rb = *it->second;
    ++c.shared_seeds;
    if (!ra.completed && !rb.completed) {
      ++c.ties;
    } else if (!rb.completed || (ra.completed && ra.final_cost < rb.final_cost)) {
      ++c.wins_a;
    } else if (!ra.completed || rb.final_cost < ra.final_cost) {
      ++c.wins_b;
    } else {
      ++c.ties;
    }
  }
  if (c.shared_seeds == 0) throw InvalidComparison("compare: the summaries share no seeds");
  return c;
}

std::string format_comparison(const Comparison& c) {
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("-"); };
  std::ostringstream os;
  os << "problem " << c.problem << ", budget " << c.population << " x " << c.iterations
     << ", shared seeds " << c.shared_seeds << '\n';
  os << "side\tlabel\tmedian_final_cost\tsuccess_rate\tmedian_iters_to_threshold\twins\n";
  os << "A\t" << c.a.label << '\t' << fmt(c.a.median) << '\t' << fmt(c.a.success_rate) << '\t'
     << opt(c.a.median_iterations_to_threshold) << '\t' << c.wins_a << '\n';
  os << "B\t" << c.b.label << '\t' << fmt(c.b.median) << '\t' << fmt(c.b.success_rate) << '\t'
     << opt(c.b.median_iterations_to_threshold) << '\t' << c.wins_b << '\n';
  os << "ties " << c.ties << ", median delta (B-A) " << fmt(c.median_delta)
     << ", success delta (B-A) " << fmt(c.success_delta) << '\n';
  return os.str();
}

}  // namespace mreo
