#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>

#include "mreo/problems.hpp"

namespace mreo {

/// n x N matrix; column j is candidate j.
using Ensemble = Eigen::MatrixXd;
/// Cost of each column of an Ensemble.
using CostVector = Eigen::VectorXd;

/// Running best cost and where it was found.
struct ExtremalRecord {
  double best_cost = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_point;
  long found_at = -1;
};

/// Pseudo-time tau_i = tau0 + i * delta_tau.
struct IterationClock {
  double tau0 = 1.0;
  double delta_tau = 1e-7;
  long i = 0;

  double tau() const noexcept { return tau_at(i); }
  double tau_at(long k) const noexcept { return tau0 + static_cast<double>(k) * delta_tau; }
  void advance() noexcept { ++i; }
};

enum class BetaSchedule { kPseudoCode, kExponential };
enum class SelectionMode { kGreedyMin, kKeepNonDecreasing, kAlwaysAccept };
enum class Variant { kNoPrediction, kWithPrediction };

/// What is subtracted as the increment term in the time-weighted gain factor.
enum class IncrementForm {
  /// Extremal-cost drift: f_hat * delta_tau on the cost row, zero on the
  /// coalescence rows.
  kExtremalDrift,
  /// Per-particle change of the innovation matrix between iterations.
  kInnovationDifference,
};

/// What plays the functional matrix F in the gain's cross-covariance factor.
enum class FunctionalForm {
  /// The innovation columns themselves.
  kInnovation,
  /// The observation functional h_j = (f_j ; x_j - x_partner), so that the
  /// innovation equals target minus functional, (f_hat ; 0) - h_j. Flips the
  /// sign of the gain.
  kObservation,
};

/// Which spread of the innovations enters the blended covariance.
enum class CovarianceForm {
  /// Innovation columns centred on their ensemble mean.
  kCentered,
  /// Change of the innovation columns since the previous iteration, centred.
  kTimeDifferenced,
};

/// How the extremal cost f_hat used in the innovations is formed.
enum class ExtremalMode { kRunningBest, kIterationBest };

struct AlgoConfig {
  Eigen::Index ensemble_size = 30;
  long max_iterations = 500;
  std::uint64_t seed = 0;

  double alpha = 0.8;
  BetaSchedule beta_schedule = BetaSchedule::kPseudoCode;
  double beta_max = 2.0;
  /// kappa of the exponential schedule; defaults to max_iterations.
  std::optional<long> beta_kappa;

  /// Cost-innovation intensity. Default: rho_scale * std of the initial costs.
  std::optional<double> rho;
  double rho_scale = 1e-2;
  /// Coalescence intensities. Default: rho_c_scale * (upper - lower).
  std::optional<Eigen::VectorXd> rho_c;
  double rho_c_scale = 1e-2;
  /// Prediction intensity matrix. Default: diag(g_scale * (upper - lower)).
  std::optional<Eigen::MatrixXd> g;
  double g_scale = 1e-2;

  double tau0 = 1.0;
  double delta_tau = 1e-7;

  SelectionMode selection = SelectionMode::kGreedyMin;
  Variant variant = Variant::kNoPrediction;
  IncrementForm increment = IncrementForm::kExtremalDrift;
  FunctionalForm functional = FunctionalForm::kInnovation;
  CovarianceForm covariance = CovarianceForm::kCentered;
  ExtremalMode extremal = ExtremalMode::kRunningBest;
  bool derangement = false;
  /// Clamp updated candidates to [lower, upper].
  bool clip_to_box = true;
  /// Stop after this many iterations without improvement; 0 disables.
  long stagnation_window = 0;

  /// Throws InvalidParameter on the first violated constraint.
  void validate(Eigen::Index dim) const;
};

/// Evaluates every column. Throws PoisonedCandidate on a non-finite cost.
CostVector evaluate_ensemble(const CostProblem& problem, const Ensemble& ensemble,
                             std::size_t* evaluations = nullptr, long iteration = -1);

/// Folds the current ensemble into the running minimum.
ExtremalRecord update_extremal(ExtremalRecord record, const Ensemble& ensemble,
                               const CostVector& costs, long iteration);

/// Root-mean-square distance of the columns from their mean.
double ensemble_spread(const Ensemble& ensemble);

}  // namespace mreo
