#include "mreo/pso.hpp"

#include <cmath>

#include "mreo/errors.hpp"

namespace mreo {
namespace {

void refresh_bests(Swarm& s, const Eigen::VectorXd& costs) {
  for (Eigen::Index j = 0; j < costs.size(); ++j) {
    if (costs(j) < s.personal_best_cost(j)) {
      s.personal_best_cost(j) = costs(j);
      s.personal_best.col(j) = s.positions.col(j);
    }
  }
  Eigen::Index arg = 0;
  const double best = s.personal_best_cost.minCoeff(&arg);
  if (best < s.global_best_cost) {
    s.global_best_cost = best;
    s.global_best = s.personal_best.col(arg);
  }
}

TraceRecord record_of(const Swarm& s) {
  TraceRecord r;
  r.iteration = s.iteration;
  r.tau = static_cast<double>(s.iteration);
  r.best_cost = s.global_best_cost;
  r.mean_cost = s.personal_best_cost.mean();
  r.spread = ensemble_spread(s.positions);
  r.best_point = s.global_best;
  return r;
}

}  // namespace

void PsoConfig::validate() const {
  if (swarm_size < 1) throw InvalidParameter("PsoConfig: swarm_size must be positive");
  if (max_iterations < 0) throw InvalidParameter("PsoConfig: max_iterations must be non-negative");
  if (!std::isfinite(params.w) || !std::isfinite(params.c1) || !std::isfinite(params.c2) ||
      !std::isfinite(params.velocity_clamp))
    throw InvalidParameter("PsoConfig: coefficients must be finite");
}

Swarm init_swarm(const CostProblem& problem, Eigen::Index size, Rng& rng, std::size_t* evaluations) {
  Swarm s;
  s.positions = uniform_box(problem.lower, problem.upper, size, rng);
  s.velocities = Eigen::MatrixXd::Zero(problem.dim(), size);
  s.personal_best = s.positions;
  s.personal_best_cost = evaluate_ensemble(problem, s.positions, evaluations, 0);
  Eigen::Index arg = 0;
  s.global_best_cost = s.personal_best_cost.minCoeff(&arg);
  s.global_best = s.positions.col(arg);
  return s;
}

void pso_step(Swarm& swarm, const CostProblem& problem, const PsoParams& params,
              const Eigen::MatrixXd& r1, const Eigen::MatrixXd& r2, std::size_t* evaluations) {
  const Eigen::Index n = swarm.positions.rows();
  const Eigen::Index count = swarm.positions.cols();
  if (r1.rows() != n || r1.cols() != count || r2.rows() != n || r2.cols() != count)
    throw InvalidArgument("pso_step: r1 and r2 must match the swarm shape");

  const Eigen::MatrixXd to_gbest = (-swarm.positions).colwise() + swarm.global_best;
  swarm.velocities = params.w * swarm.velocities +
                     params.c1 * r1.cwiseProduct(swarm.personal_best - swarm.positions) +
                     params.c2 * r2.cwiseProduct(to_gbest);
  if (params.velocity_clamp > 0.0) {
    const Eigen::VectorXd vmax = params.velocity_clamp * (problem.upper - problem.lower);
    for (Eigen::Index j = 0; j < count; ++j)
      swarm.velocities.col(j) = swarm.velocities.col(j).cwiseMin(vmax).cwiseMax(-vmax);
  }
  swarm.positions += swarm.velocities;
  if (params.clip_to_box)
    for (Eigen::Index j = 0; j < count; ++j)
      swarm.positions.col(j) = swarm.positions.col(j).cwiseMax(problem.lower).cwiseMin(problem.upper);

  ++swarm.iteration;
  refresh_bests(swarm, evaluate_ensemble(problem, swarm.positions, evaluations, swarm.iteration));
}

void pso_step(Swarm& swarm, const CostProblem& problem, const PsoParams& params, Rng& rng,
              std::size_t* evaluations) {
  const Eigen::Index n = swarm.positions.rows();
  const Eigen::Index count = swarm.positions.cols();
  Eigen::MatrixXd r1(n, count), r2(n, count);
  for (Eigen::Index j = 0; j < count; ++j)
    for (Eigen::Index k = 0; k < n; ++k) {
      r1(k, j) = rng.uniform();
      r2(k, j) = rng.uniform();
    }
  pso_step(swarm, problem, params, r1, r2, evaluations);
}

RunResult pso_run(const CostProblem& problem, const PsoConfig& config) {
  config.validate();
  RunResult out;
  Rng init = Rng::stream(config.seed, Rng::Purpose::kInitialization);
  Rng rng = Rng::stream(config.seed, Rng::Purpose::kSwarm);
  Swarm swarm = init_swarm(problem, config.swarm_size, init, &out.evaluations);
  out.trace.reserve(static_cast<std::size_t>(config.max_iterations) + 1);
  out.trace.push_back(record_of(swarm));
  for (long it = 0; it < config.max_iterations; ++it) {
    pso_step(swarm, problem, config.params, rng, &out.evaluations);
    out.trace.push_back(record_of(swarm));
  }
  out.extremal.best_cost = swarm.global_best_cost;
  out.extremal.best_point = swarm.global_best;
  out.extremal.found_at = swarm.iteration;
  // Expose the final swarm through the common state shape.
  out.final_state.ensemble = swarm.positions;
  out.final_state.costs = swarm.personal_best_cost;
  out.final_state.extremal = out.extremal;
  out.final_state.eval_count = out.evaluations;
  return out;
}

}  // namespace mreo
