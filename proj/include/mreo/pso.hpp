#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>

#include "mreo/ensemble.hpp"
#include "mreo/optimizer.hpp"
#include "mreo/problems.hpp"
#include "mreo/rng.hpp"

namespace mreo {

/// Global-best particle swarm state; columns are particles.
struct Swarm {
  Eigen::MatrixXd positions;
  Eigen::MatrixXd velocities;
  Eigen::MatrixXd personal_best;
  Eigen::VectorXd personal_best_cost;
  Eigen::VectorXd global_best;
  double global_best_cost = 0.0;
  long iteration = 0;
};

struct PsoParams {
  double w = 0.729;
  double c1 = 1.494;
  double c2 = 1.494;
  /// Velocity clamp as a fraction of the box width per coordinate; <= 0 disables.
  double velocity_clamp = 0.2;
  bool clip_to_box = true;
};

struct PsoConfig {
  Eigen::Index swarm_size = 30;
  long max_iterations = 500;
  std::uint64_t seed = 0;
  PsoParams params;

  void validate() const;
};

/// Positions uniform in the box, zero velocities, bests from the first evaluation.
Swarm init_swarm(const CostProblem& problem, Eigen::Index size, Rng& rng,
                 std::size_t* evaluations = nullptr);

/// One inertia-weight update with caller-supplied r1, r2 (n x N, entries in [0,1)).
void pso_step(Swarm& swarm, const CostProblem& problem, const PsoParams& params,
              const Eigen::MatrixXd& r1, const Eigen::MatrixXd& r2,
              std::size_t* evaluations = nullptr);

/// One update drawing r1, r2 from `rng`.
void pso_step(Swarm& swarm, const CostProblem& problem, const PsoParams& params, Rng& rng,
              std::size_t* evaluations = nullptr);

/// Same result and trace contract as `run` for the main optimizer.
RunResult pso_run(const CostProblem& problem, const PsoConfig& config);

}  // namespace mreo
