// Acceptance report: one PASS/FAIL line per criterion.
//
//   acceptance              run every criterion
//   acceptance --criterion 3
//
// Exit status is nonzero when any selected criterion fails.

#include <CLI11.hpp>

#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "mreo/harness.hpp"
#include "support/oracle.hpp"
#include "support/properties.hpp"

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::vector<std::uint64_t> seeds(std::uint64_t first, std::uint64_t last) {
  std::vector<std::uint64_t> out(last - first + 1);
  std::iota(out.begin(), out.end(), first);
  return out;
}

mreo::RunSummary experiment(const std::string& problem, const std::string& algorithm, long iterations,
                            const std::vector<std::uint64_t>& seed_list, double tolerance,
                            nlohmann::json problem_extra = nlohmann::json::object()) {
  nlohmann::json doc = {{"schema_version", 1},
                        {"problem", {{"name", problem}}},
                        {"algorithm", {{"name", algorithm}}},
                        {"seeds", seed_list},
                        {"iterations", iterations},
                        {"tolerance", tolerance}};
  doc["problem"].update(problem_extra);
  mreo::RunOptions opts;
  opts.write_files = false;
  return mreo::run_experiment(mreo::parse_config(doc), opts);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Verdict recovery(const std::string& problem) {
  const auto s = experiment(problem, "mreo", 500, seeds(1, 20), 1e-2);
  std::vector<double> wall;
  std::size_t ok = 0;
  for (const auto& r : s.runs) {
    wall.push_back(r.wall_seconds);
    ok += r.success;
  }
  std::sort(wall.begin(), wall.end());
  const double median_wall = 0.5 * (wall[9] + wall[10]);
  const bool pass = ok >= 16 && median_wall <= 30.0 && s.stats.failed == 0;
  return {pass, problem + fmt(" recovery %.0f/20 within 1e-2 (need >= 16), median wall %.3f s (limit 30 s)",
                              static_cast<double>(ok), median_wall)};
}

Verdict comparative() {
  bool pass = true;
  std::string detail;
  for (const std::string problem : {"lorenz", "chen"}) {
    const auto a = experiment(problem, "mreo", 500, seeds(1, 20), 1e-2);
    const auto b = experiment(problem, "pso", 500, seeds(1, 20), 1e-2);
    const auto c = mreo::compare(a, b);
    const bool ok = c.a.median <= c.b.median && c.wins_a >= 12;
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + problem +
              fmt(" median mreo %.3g vs pso %.3g, mreo wins %.0f/20 (need <= and >= 12)", c.a.median,
                  c.b.median, static_cast<double>(c.wins_a));
  }
  return {pass, detail};
}

Verdict property_suite() {
  std::size_t failed = 0;
  std::string detail;
  const auto all = properties::all();
  for (const auto& p : all) {
    const std::string f = p.check();
    if (!f.empty()) {
      ++failed;
      detail += "; " + p.name + ": " + f;
    }
  }
  return {failed == 0, std::to_string(all.size() - failed) + "/" + std::to_string(all.size()) +
                           " properties hold" + detail};
}

Verdict oracle_equivalence() {
  double worst = 0.0;
  bool moved = true, books = true;
  for (auto inc : {mreo::IncrementForm::kExtremalDrift, mreo::IncrementForm::kInnovationDifference})
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
      const auto r = oracle::step_check(inc, seed);
      worst = std::max({worst, r.ensemble_error, r.cost_error, r.gain_norm_error});
      moved = moved && r.correction_size > 0.0;
      books = books && r.bookkeeping_ok;
    }
  const auto g = oracle::gain_check();
  worst = std::max({worst, g.difference_error, g.drift_error});
  return {worst <= 1e-12 && moved && books,
          fmt("n=1, N=2 step vs exact rational transcription: max relative error %.2e (limit 1e-12)", worst)};
}

Verdict calibration() {
  const auto sphere = experiment("sphere", "mreo", 200, seeds(1, 50), 1e-6, {{"dim", 1}});
  const auto rast = experiment("rastrigin", "mreo", 500, seeds(1, 50), 1e-2, {{"dim", 2}});
  const double ps = sphere.stats.success_rate, pr = rast.stats.success_rate;
  return {ps >= 0.95 && pr >= 0.70,
          fmt("1-D sphere <= 1e-6 in 200 iterations: %.0f%% (need >= 95%%); 2-D rastrigin <= 1e-2 in "
              "500 iterations: %.0f%% (need >= 70%%)",
              100 * ps, 100 * pr)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance report"};
  int only = 0;
  app.add_option("--criterion", only, "Run a single criterion (1-6)")->check(CLI::Range(1, 6));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, Verdict (*)()>> criteria = {
      {1, [] { return recovery("lorenz"); }},
      {2, [] { return recovery("chen"); }},
      {3, comparative},
      {4, property_suite},
      {5, oracle_equivalence},
      {6, calibration},
  };
  int failures = 0;
  for (const auto& [id, fn] : criteria) {
    if (only && id != only) continue;
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    std::printf("%s criterion %d: %s\n", v.pass ? "PASS" : "FAIL", id, v.detail.c_str());
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
