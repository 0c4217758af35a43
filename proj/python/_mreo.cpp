#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "mreo/errors.hpp"
#include "mreo/gain.hpp"
#include "mreo/harness.hpp"
#include "mreo/optimizer.hpp"
#include "mreo/problems.hpp"
#include "mreo/pso.hpp"
#include "mreo/rng.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

py::dict result_dict(const mreo::RunResult& r, Eigen::Index dim) {
  const auto n = static_cast<Eigen::Index>(r.trace.size());
  Eigen::VectorXd tau(n), best(n), mean(n), spread(n), beta(n), gain_norm(n);
  Eigen::VectorXi iteration(n);
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> l_index(n);
  Eigen::MatrixXd points(n, dim);
  for (Eigen::Index k = 0; k < n; ++k) {
    const auto& t = r.trace[static_cast<std::size_t>(k)];
    iteration(k) = static_cast<int>(t.iteration);
    tau(k) = t.tau;
    best(k) = t.best_cost;
    mean(k) = t.mean_cost;
    spread(k) = t.spread;
    beta(k) = t.beta;
    gain_norm(k) = t.gain_norm;
    l_index(k) = t.l_index;
    points.row(k) = t.best_point.transpose();
  }
  py::dict trace;
  trace["iteration"] = iteration;
  trace["tau"] = tau;
  trace["best_cost"] = best;
  trace["mean_cost"] = mean;
  trace["spread"] = spread;
  trace["beta"] = beta;
  trace["gain_norm"] = gain_norm;
  trace["l_index"] = l_index;
  trace["best_point"] = points;

  py::dict out;
  out["best_cost"] = r.extremal.best_cost;
  out["best_params"] = r.extremal.best_point;
  out["found_at"] = r.extremal.found_at;
  out["evaluations"] = r.evaluations;
  out["trace"] = trace;
  return out;
}

mreo::CostProblem python_problem(std::string name, Eigen::VectorXd lower, Eigen::VectorXd upper,
                                 py::function cost, std::optional<Eigen::VectorXd> optimum,
                                 double optimum_cost) {
  if (lower.size() != upper.size() || lower.size() == 0)
    throw mreo::InvalidBounds("lower and upper must be non-empty and of equal length");
  if ((lower.array() > upper.array()).any()) throw mreo::InvalidBounds("lower bound exceeds upper bound");
  mreo::CostProblem p;
  p.name = std::move(name);
  p.lower = std::move(lower);
  p.upper = std::move(upper);
  p.optimum = std::move(optimum);
  p.optimum_cost = optimum_cost;
  p.eval = [cost](const Eigen::VectorXd& x) {
    py::gil_scoped_acquire gil;
    return cost(x).cast<double>();
  };
  return p;
}

}  // namespace

PYBIND11_MODULE(_mreo, m) {
  m.doc() = "Native core of the mreo package";

  static py::exception<mreo::Error> base(m, "MreoError", PyExc_RuntimeError);
  py::register_exception<mreo::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<mreo::InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<mreo::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<mreo::InvalidComparison>(m, "InvalidComparison", PyExc_ValueError);
  py::register_exception<mreo::PoisonedCandidate>(m, "PoisonedCandidate", base.ptr());

  py::class_<mreo::CostProblem>(m, "Problem")
      .def(py::init(&python_problem), py::arg("name"), py::arg("lower"), py::arg("upper"),
           py::arg("cost"), py::arg("optimum") = py::none(), py::arg("optimum_cost") = 0.0)
      .def_readonly("name", &mreo::CostProblem::name)
      .def_readonly("lower", &mreo::CostProblem::lower)
      .def_readonly("upper", &mreo::CostProblem::upper)
      .def_readonly("optimum", &mreo::CostProblem::optimum)
      .def_readonly("optimum_cost", &mreo::CostProblem::optimum_cost)
      .def_readonly("parameter_recovery", &mreo::CostProblem::parameter_recovery)
      .def_property_readonly("dim", &mreo::CostProblem::dim)
      .def("__call__", [](const mreo::CostProblem& p, const Eigen::VectorXd& x) {
        if (x.size() != p.dim()) throw mreo::InvalidArgument("point has the wrong dimension");
        return p.eval(x);
      })
      .def("__repr__", [](const mreo::CostProblem& p) {
        return "<Problem " + p.name + " dim=" + std::to_string(p.dim()) + ">";
      });

  m.def("problem_names", &mreo::problem_names);
  m.def(
      "problem",
      [](const std::string& name, Eigen::Index dim) {
        mreo::ProblemSpec spec;
        spec.name = name;
        spec.dim = dim;
        const auto names = mreo::problem_names();
        if (std::find(names.begin(), names.end(), name) == names.end())
          throw mreo::InvalidArgument("unknown problem \"" + name + "\"");
        return mreo::build_problem(spec);
      },
      py::arg("name"), py::arg("dim") = 2);

  m.def(
      "run",
      [](const mreo::CostProblem& problem, long iterations, std::uint64_t seed, const std::string& options) {
        auto c = mreo::parse_mreo_options(json::parse(options), problem.dim());
        c.max_iterations = iterations;
        c.seed = seed;
        mreo::RunResult r;
        {
          py::gil_scoped_release release;
          r = mreo::run(problem, c);
        }
        return result_dict(r, problem.dim());
      },
      py::arg("problem"), py::arg("iterations"), py::arg("seed"), py::arg("options"));

  m.def(
      "pso_run",
      [](const mreo::CostProblem& problem, long iterations, std::uint64_t seed, const std::string& options) {
        auto c = mreo::parse_pso_options(json::parse(options));
        c.max_iterations = iterations;
        c.seed = seed;
        mreo::RunResult r;
        {
          py::gil_scoped_release release;
          r = mreo::pso_run(problem, c);
        }
        return result_dict(r, problem.dim());
      },
      py::arg("problem"), py::arg("iterations"), py::arg("seed"), py::arg("options"));

  m.def(
      "run_experiment",
      [](const std::string& config, const std::string& base_dir, bool write_files) {
        const auto c = mreo::parse_config(json::parse(config), base_dir);
        mreo::RunOptions opts;
        opts.write_files = write_files;
        py::gil_scoped_release release;
        return mreo::to_json(mreo::run_experiment(c, opts)).dump();
      },
      py::arg("config"), py::arg("base_dir") = "", py::arg("write_files") = false);

  m.def(
      "compare",
      [](const std::string& a, const std::string& b) {
        const auto c = mreo::compare(mreo::summary_from_json(json::parse(a)),
                                     mreo::summary_from_json(json::parse(b)));
        py::dict out;
        out["problem"] = c.problem;
        out["shared_seeds"] = c.shared_seeds;
        out["wins_a"] = c.wins_a;
        out["wins_b"] = c.wins_b;
        out["ties"] = c.ties;
        out["median_a"] = c.a.median;
        out["median_b"] = c.b.median;
        out["median_delta"] = c.median_delta;
        out["success_delta"] = c.success_delta;
        out["report"] = mreo::format_comparison(c);
        return out;
      },
      py::arg("a"), py::arg("b"));

  m.def("max_relative_error", &mreo::max_relative_error, py::arg("x"), py::arg("reference"));

  // Trajectories.
  m.def(
      "integrate",
      [](const std::string& model, const Eigen::VectorXd& params, const Eigen::VectorXd& x0, double t0,
         double t_end, double dt) {
        if (model != "lorenz" && model != "chen") throw mreo::InvalidArgument("model must be lorenz or chen");
        const auto ref =
            mreo::integrate(model == "lorenz" ? mreo::lorenz_model() : mreo::chen_model(), params, x0, t0, t_end, dt);
        return py::make_tuple(Eigen::Map<const Eigen::VectorXd>(ref.times.data(), ref.times.size()).eval(),
                              ref.states);
      },
      py::arg("model"), py::arg("params"), py::arg("x0"), py::arg("t0"), py::arg("t_end"), py::arg("dt"));

  // Random streams; each call draws from a fresh engine seeded with `seed`.
  m.def(
      "partner_indices",
      [](Eigen::Index n, std::uint64_t seed, bool derangement) {
        mreo::Rng rng(seed);
        return mreo::partner_indices(n, rng, derangement);
      },
      py::arg("n"), py::arg("seed"), py::arg("derangement") = false);
  m.def(
      "full_permutation",
      [](Eigen::Index n, std::uint64_t seed) {
        mreo::Rng rng(seed);
        return mreo::full_permutation(n, rng);
      },
      py::arg("n"), py::arg("seed"));
  m.def(
      "uniform_box",
      [](const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, Eigen::Index count, std::uint64_t seed) {
        mreo::Rng rng(seed);
        return mreo::uniform_box(lower, upper, count, rng);
      },
      py::arg("lower"), py::arg("upper"), py::arg("count"), py::arg("seed"));
  m.def(
      "gaussian_increments",
      [](Eigen::Index count, const Eigen::MatrixXd& intensity, std::uint64_t seed) {
        mreo::Rng rng(seed);
        return mreo::gaussian_increments(count, intensity, rng);
      },
      py::arg("count"), py::arg("intensity"), py::arg("seed"));

  // Gain pieces.
  m.def("build_innovations", &mreo::build_innovations, py::arg("ensemble"), py::arg("costs"),
        py::arg("f_hat"), py::arg("partners"));
  m.def(
      "blended_covariance",
      [](const Eigen::MatrixXd& spread, double alpha, double rho, const Eigen::VectorXd& rho_c) {
        return mreo::blended_covariance(spread, alpha, mreo::NoiseBlock(rho, rho_c));
      },
      py::arg("spread"), py::arg("alpha"), py::arg("rho"), py::arg("rho_c"));
  m.def("regularized_inverse", &mreo::regularized_inverse, py::arg("m"));
  m.def(
      "gain",
      [](const Eigen::MatrixXd& prev_ensemble, const Eigen::MatrixXd& ensemble,
         const Eigen::MatrixXd& prev_functional, const Eigen::MatrixXd& functional,
         const Eigen::MatrixXd& increment, double tau_prev, double tau, const Eigen::MatrixXd& cov) {
        return mreo::gain({prev_ensemble, ensemble, prev_functional, functional, increment, tau_prev, tau, cov});
      },
      py::arg("prev_ensemble"), py::arg("ensemble"), py::arg("prev_functional"), py::arg("functional"),
      py::arg("increment"), py::arg("tau_prev"), py::arg("tau"), py::arg("cov"));
  m.def("corrections", &mreo::corrections, py::arg("gain"), py::arg("beta"), py::arg("innovations"));
  m.def("scramble", &mreo::scramble, py::arg("corrections"), py::arg("sigma2"));
  m.def(
      "perturbation_index",
      [](double rho, const Eigen::VectorXd& rho_c) { return mreo::perturbation_index(mreo::NoiseBlock(rho, rho_c)); },
      py::arg("rho"), py::arg("rho_c"));
}
