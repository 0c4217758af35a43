#include "mreo/optimizer.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "mreo/errors.hpp"

namespace mreo {
namespace {

double sample_std(const CostVector& costs) {
  if (costs.size() < 2) return 0.0;
  const double mean = costs.mean();
  return std::sqrt((costs.array() - mean).square().sum() / static_cast<double>(costs.size() - 1));
}

void resolve_intensities(OptimizerState& state, const CostProblem& problem, const AlgoConfig& config) {
  if (config.rho) {
    state.rho = *config.rho;
  } else {
    double scale = sample_std(state.costs);
    if (!(scale > 0.0) || !std::isfinite(scale)) scale = std::max(1.0, std::abs(state.costs.mean()));
    state.rho = config.rho_scale * scale;
  }
  const Eigen::VectorXd width = problem.upper - problem.lower;
  if (config.rho_c) {
    state.rho_c = *config.rho_c;
  } else {
    state.rho_c = config.rho_c_scale * width;
    for (Eigen::Index k = 0; k < width.size(); ++k)
      if (!(state.rho_c(k) > 0.0)) state.rho_c(k) = config.rho_c_scale;
  }
  if (config.g) {
    state.g = *config.g;
  } else {
    state.g = (config.g_scale * width).asDiagonal();
  }
}

void clip(Ensemble& x, const CostProblem& problem) {
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    x.col(j) = x.col(j).cwiseMax(problem.lower).cwiseMin(problem.upper);
}

}  // namespace

OptimizerState initialize(const CostProblem& problem, const AlgoConfig& config, Ensemble initial) {
  config.validate(problem.dim());
  if (initial.rows() != problem.dim() || initial.cols() != config.ensemble_size)
    throw InvalidArgument("initialize: initial ensemble must be n x ensemble_size");
  if (!initial.allFinite()) throw InvalidArgument("initialize: initial ensemble has non-finite entries");

  OptimizerState state;
  state.seed = config.seed;
  state.clock = IterationClock{config.tau0, config.delta_tau, 0};
  state.ensemble = std::move(initial);
  state.costs = evaluate_ensemble(problem, state.ensemble, &state.eval_count, 0);
  state.extremal = update_extremal(ExtremalRecord{}, state.ensemble, state.costs, 0);
  resolve_intensities(state, problem, config);
  return state;
}

OptimizerState initialize(const CostProblem& problem, const AlgoConfig& config) {
  config.validate(problem.dim());
  Rng rng = Rng::stream(config.seed, Rng::Purpose::kInitialization);
  return initialize(problem, config,
                    uniform_box(problem.lower, problem.upper, config.ensemble_size, rng));
}

Ensemble predict(const OptimizerState& state, Rng& rng) {
  return state.ensemble + gaussian_increments(state.ensemble.cols(), state.g, rng);
}

double beta_factor(long i, const AlgoConfig& config) {
  if (i < 1) throw InvalidParameter("beta_factor: iteration index starts at 1");
  const auto x = static_cast<double>(i);
  switch (config.beta_schedule) {
    case BetaSchedule::kPseudoCode:
      return 1.0 - std::exp(-(x - 1.0));
    case BetaSchedule::kExponential: {
      const long kappa = config.beta_kappa.value_or(std::max(1L, config.max_iterations));
      const double b = config.beta_max * std::exp(x + 1.0 - static_cast<double>(kappa));
      return std::min(config.beta_max, b);
    }
  }
  throw InvalidParameter("beta_factor: unknown schedule");
}

Selection select(const Ensemble& old, const CostVector& old_costs, const Ensemble& candidate,
                 const CostVector& candidate_costs, SelectionMode mode) {
  if (old.rows() != candidate.rows() || old.cols() != candidate.cols() ||
      old_costs.size() != old.cols() || candidate_costs.size() != candidate.cols())
    throw InvalidArgument("select: shapes of old and candidate ensembles differ");
  Selection out{old, old_costs, std::vector<bool>(static_cast<std::size_t>(old.cols()), false)};
  for (Eigen::Index j = 0; j < old.cols(); ++j) {
    bool keep = true;
    switch (mode) {
      case SelectionMode::kGreedyMin:
        keep = candidate_costs(j) <= old_costs(j);
        break;
      case SelectionMode::kKeepNonDecreasing:
        keep = candidate_costs(j) >= old_costs(j);
        break;
      case SelectionMode::kAlwaysAccept:
        keep = true;
        break;
    }
    if (keep) {
      out.ensemble.col(j) = candidate.col(j);
      out.costs(j) = candidate_costs(j);
    }
    out.accepted[static_cast<std::size_t>(j)] = keep;
  }
  return out;
}

TraceRecord snapshot(const OptimizerState& state) {
  TraceRecord r;
  r.iteration = state.clock.i;
  r.tau = state.clock.tau();
  r.best_cost = state.extremal.best_cost;
  r.mean_cost = state.costs.mean();
  r.spread = ensemble_spread(state.ensemble);
  r.best_point = state.extremal.best_point;
  r.l_index = perturbation_index(NoiseBlock(state.rho, state.rho_c));
  return r;
}

TraceRecord step(OptimizerState& state, const CostProblem& problem, const AlgoConfig& config) {
  const long i = state.clock.i + 1;
  const double tau = state.clock.tau_at(i);
  const Eigen::Index count = state.ensemble.cols();
  const double beta = beta_factor(i, config);

  // Working ensemble: the prediction (pseudo-code 1) or the last accepted one.
  Ensemble working;
  CostVector working_costs;
  if (config.variant == Variant::kWithPrediction) {
    Rng rng = Rng::stream(state.seed, Rng::Purpose::kPrediction, static_cast<std::uint64_t>(i));
    working = predict(state, rng);
    working_costs = evaluate_ensemble(problem, working, &state.eval_count, i);
    state.extremal = update_extremal(std::move(state.extremal), working, working_costs, i);
  } else {
    working = state.ensemble;
    working_costs = state.costs;
  }

  const double f_hat = config.extremal == ExtremalMode::kRunningBest ? state.extremal.best_cost
                                                                       : working_costs.minCoeff();

  Rng partner_rng = Rng::stream(state.seed, Rng::Purpose::kPartners, static_cast<std::uint64_t>(i));
  Rng scramble_rng = Rng::stream(state.seed, Rng::Purpose::kScramble, static_cast<std::uint64_t>(i));
  const auto partners = partner_indices(count, partner_rng, config.derangement);
  const auto sigma2 = full_permutation(count, scramble_rng);

  const InnovationMatrix innovations = build_innovations(working, working_costs, f_hat, partners);
  const Eigen::MatrixXd functional = functional_matrix(config.functional, innovations, f_hat);
  if (!state.has_prev) {
    // First update: the previous snapshot is the current one, one clock tick earlier.
    state.prev_ensemble = working;
    state.prev_innovations = innovations;
    state.prev_functional = functional;
    state.prev_tau = tau - state.clock.delta_tau;
    state.has_prev = true;
  }

  const NoiseBlock noise(state.rho, state.rho_c);
  const Eigen::MatrixXd cov =
      config.covariance == CovarianceForm::kCentered
          ? blended_covariance(innovations, config.alpha, noise)
          : blended_covariance(innovations - state.prev_innovations, config.alpha, noise);
  const Eigen::MatrixXd increment = gain_increment(config.increment, functional,
                                                  state.prev_functional, f_hat, state.clock.delta_tau);
  const GainMatrix g = gain(GainInputs{state.prev_ensemble, working, state.prev_functional,
                                       functional, increment, state.prev_tau, tau, cov});

  Ensemble candidate = working + scramble(corrections(g, beta, innovations), sigma2);
  if (config.clip_to_box) clip(candidate, problem);
  const CostVector candidate_costs = evaluate_ensemble(problem, candidate, &state.eval_count, i);

  Selection kept = select(state.ensemble, state.costs, candidate, candidate_costs, config.selection);
  state.extremal = update_extremal(std::move(state.extremal), candidate, candidate_costs, i);

  state.prev_ensemble = std::move(working);
  state.prev_innovations = innovations;
  state.prev_functional = functional;
  state.prev_tau = tau;
  state.ensemble = std::move(kept.ensemble);
  state.costs = std::move(kept.costs);
  state.clock.advance();

  TraceRecord r = snapshot(state);
  r.beta = beta;
  r.gain_norm = g.norm();
  r.l_index = perturbation_index(noise);
  return r;
}

RunResult run(const CostProblem& problem, const AlgoConfig& config, Ensemble initial) {
  RunResult out;
  out.final_state = initialize(problem, config, std::move(initial));
  OptimizerState& state = out.final_state;
  out.trace.reserve(static_cast<std::size_t>(config.max_iterations) + 1);
  out.trace.push_back(snapshot(state));
  for (long it = 0; it < config.max_iterations; ++it) {
    try {
      out.trace.push_back(step(state, problem, config));
    } catch (const PoisonedCandidate&) {
      throw;
    } catch (const Error& e) {
      throw Error("iteration " + std::to_string(state.clock.i + 1) + ": " + e.what());
    }
    if (config.stagnation_window > 0 &&
        state.clock.i - state.extremal.found_at >= config.stagnation_window)
      break;
  }
  out.extremal = state.extremal;
  out.evaluations = state.eval_count;
  return out;
}

RunResult run(const CostProblem& problem, const AlgoConfig& config) {
  config.validate(problem.dim());
  Rng rng = Rng::stream(config.seed, Rng::Purpose::kInitialization);
  return run(problem, config, uniform_box(problem.lower, problem.upper, config.ensemble_size, rng));
}

}  // namespace mreo
