#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mreo/ensemble.hpp"
#include "mreo/gain.hpp"
#include "mreo/problems.hpp"
#include "mreo/rng.hpp"

namespace mreo {

/// One row of a run trace. Iteration 0 describes the initial ensemble.
struct TraceRecord {
  long iteration = 0;
  double tau = 0.0;
  double best_cost = 0.0;
  double mean_cost = 0.0;
  double spread = 0.0;
  double beta = 0.0;
  double gain_norm = 0.0;
  std::int64_t l_index = 0;
  Eigen::VectorXd best_point;
};

using Trace = std::vector<TraceRecord>;

struct OptimizerState {
  Ensemble ensemble;
  CostVector costs;

  // Working ensemble and innovations of the previous iteration.
  Ensemble prev_ensemble;
  InnovationMatrix prev_innovations;
  Eigen::MatrixXd prev_functional;
  double prev_tau = 0.0;
  bool has_prev = false;

  ExtremalRecord extremal;
  IterationClock clock;
  std::uint64_t seed = 0;
  std::size_t eval_count = 0;

  // Intensities resolved from the config and the initial ensemble.
  double rho = 0.0;
  Eigen::VectorXd rho_c;
  Eigen::MatrixXd g;
};

/// Result of the per-particle accept/revert rule.
struct Selection {
  Ensemble ensemble;
  CostVector costs;
  std::vector<bool> accepted;
};

/// Samples the initial ensemble from the problem box and evaluates it.
OptimizerState initialize(const CostProblem& problem, const AlgoConfig& config);
/// Starts from a given ensemble instead of sampling one.
OptimizerState initialize(const CostProblem& problem, const AlgoConfig& config, Ensemble initial);

/// Random-walk proposal x + dxi with dxi ~ N(0, g g^T) per column.
Ensemble predict(const OptimizerState& state, Rng& rng);

/// Annealing factor for iteration i >= 1.
double beta_factor(long i, const AlgoConfig& config);

Selection select(const Ensemble& old, const CostVector& old_costs, const Ensemble& candidate,
                 const CostVector& candidate_costs, SelectionMode mode);

/// Advances `state` by one iteration and returns its trace row.
TraceRecord step(OptimizerState& state, const CostProblem& problem, const AlgoConfig& config);

/// Trace row describing the state without an update (used for iteration 0).
TraceRecord snapshot(const OptimizerState& state);

struct RunResult {
  ExtremalRecord extremal;
  Trace trace;
  std::size_t evaluations = 0;
  OptimizerState final_state;
};

RunResult run(const CostProblem& problem, const AlgoConfig& config);
/// Runs from a caller-supplied initial ensemble.
RunResult run(const CostProblem& problem, const AlgoConfig& config, Ensemble initial);

}  // namespace mreo
