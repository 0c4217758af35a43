#include "mreo/ensemble.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "mreo/errors.hpp"

namespace mreo {

void AlgoConfig::validate(Eigen::Index dim) const {
  auto fail = [](const std::string& what) { throw InvalidParameter("AlgoConfig: " + what); };
  if (ensemble_size < 2) fail("ensemble_size must be at least 2 (coalescence needs a partner)");
  if (max_iterations < 0) fail("max_iterations must be non-negative");
  if (!(alpha > 0.0 && alpha < 1.0)) fail("alpha must lie strictly inside (0, 1)");
  if (!(beta_max > 0.0) || !std::isfinite(beta_max)) fail("beta_max must be positive and finite");
  if (beta_kappa && *beta_kappa < 1) fail("beta_kappa must be at least 1");
  if (rho && !(*rho > 0.0 && std::isfinite(*rho))) fail("rho must be positive and finite");
  if (!(rho_scale > 0.0 && std::isfinite(rho_scale))) fail("rho_scale must be positive");
  if (!(rho_c_scale > 0.0 && std::isfinite(rho_c_scale))) fail("rho_c_scale must be positive");
  if (!(g_scale >= 0.0 && std::isfinite(g_scale))) fail("g_scale must be non-negative");
  if (rho_c) {
    if (rho_c->size() != dim) fail("rho_c must have one entry per coordinate");
    if (!rho_c->allFinite() || (rho_c->array() <= 0.0).any()) fail("rho_c entries must be positive");
  }
  if (g) {
    if (g->rows() != dim || g->cols() != dim) fail("g must be an n x n matrix");
    if (!g->allFinite()) fail("g must be finite");
  }
  if (!(delta_tau > 0.0 && std::isfinite(delta_tau))) fail("delta_tau must be positive");
  if (!std::isfinite(tau0)) fail("tau0 must be finite");
  if (stagnation_window < 0) fail("stagnation_window must be non-negative");
}

CostVector evaluate_ensemble(const CostProblem& problem, const Ensemble& ensemble,
                             std::size_t* evaluations, long iteration) {
  if (ensemble.rows() != problem.dim())
    throw InvalidArgument("evaluate_ensemble: ensemble dimension " +
                          std::to_string(ensemble.rows()) + " does not match problem dimension " +
                          std::to_string(problem.dim()));
  CostVector costs(ensemble.cols());
  for (Eigen::Index j = 0; j < ensemble.cols(); ++j) {
    const double c = problem.eval(ensemble.col(j));
    if (!std::isfinite(c)) {
      std::ostringstream os;
      os << "non-finite cost " << c << " for candidate column " << j;
      if (iteration >= 0) os << " at iteration " << iteration;
      throw PoisonedCandidate(static_cast<std::size_t>(j), iteration, os.str());
    }
    costs(j) = c;
  }
  if (evaluations) *evaluations += static_cast<std::size_t>(ensemble.cols());
  return costs;
}

ExtremalRecord update_extremal(ExtremalRecord record, const Ensemble& ensemble,
                               const CostVector& costs, long iteration) {
  if (costs.size() == 0) return record;
  Eigen::Index arg = 0;
  const double best = costs.minCoeff(&arg);
  if (best < record.best_cost) {
    record.best_cost = best;
    record.best_point = ensemble.col(arg);
    record.found_at = iteration;
  }
  return record;
}

double ensemble_spread(const Ensemble& ensemble) {
  if (ensemble.cols() == 0) return 0.0;
  const Eigen::VectorXd mean = ensemble.rowwise().mean();
  return std::sqrt((ensemble.colwise() - mean).colwise().squaredNorm().mean());
}

}  // namespace mreo
