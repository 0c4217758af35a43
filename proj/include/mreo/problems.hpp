#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mreo {

/// A scalar cost over R^n with an initialization box.
///
/// `eval` must be deterministic and safe to call concurrently.
struct CostProblem {
  std::string name;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::function<double(const Eigen::VectorXd&)> eval;
  /// Known global minimizer (true parameters for recovery problems).
  std::optional<Eigen::VectorXd> optimum;
  double optimum_cost = 0.0;
  /// Success is judged by relative parameter error instead of cost.
  bool parameter_recovery = false;

  Eigen::Index dim() const noexcept { return lower.size(); }
};

/// Right-hand side of x' = field(x, t, theta).
struct OdeModel {
  std::string label;
  Eigen::Index state_dim = 0;
  Eigen::Index param_dim = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd& x, double t, const Eigen::VectorXd& theta)>
      field;
};

struct ReferenceTrajectory {
  std::vector<double> times;
  Eigen::MatrixXd states;  // (M+1) x state_dim
  std::optional<Eigen::VectorXd> true_params;

  Eigen::Index steps() const noexcept { return states.rows() - 1; }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

Eigen::Vector3d lorenz_field(const Eigen::Vector3d& x, const Eigen::Vector3d& theta);
Eigen::Vector3d chen_field(const Eigen::Vector3d& x, const Eigen::Vector3d& theta);

OdeModel lorenz_model();
OdeModel chen_model();

/// One classical fourth-order Runge-Kutta step. Throws IntegrationBlowup
/// when a stage goes non-finite.
Eigen::VectorXd rk4_step(const OdeModel& model, const Eigen::VectorXd& params,
                         const Eigen::VectorXd& x, double t, double dt);

/// Fixed-step RK4 over (t0, t_end]; the result includes x0 at t0.
ReferenceTrajectory integrate(const OdeModel& model, const Eigen::VectorXd& params,
                              const Eigen::VectorXd& x0, double t0, double t_end, double dt);

/// States beyond this magnitude (inf-norm) count as a blow-up.
inline constexpr double kBlowupMagnitude = 1e9;

/// Sum over the time grid of squared state misfit between `reference` and a
/// simulation with `params`. Blow-ups are penalized with
/// 1e18 - (completed fraction) * 1e16 instead of throwing.
double trajectory_cost(const OdeModel& model, const ReferenceTrajectory& reference,
                       const Eigen::VectorXd& params);

/// Copy of `reference` with N(0, sigma^2) noise on every state after x0.
ReferenceTrajectory with_measurement_noise(ReferenceTrajectory reference, double sigma,
                                           std::uint64_t seed);

/// Parameter recovery problem; the reference is shared by all evaluations.
CostProblem recovery_problem(std::string name, OdeModel model,
                             std::shared_ptr<const ReferenceTrajectory> reference,
                             Eigen::VectorXd lower, Eigen::VectorXd upper);

struct OscillatorSetup {
  Eigen::VectorXd true_params;
  Eigen::VectorXd x0 = Eigen::Vector3d::Ones();
  double dt = 0.01;
  double t_end = 0.3;
  Eigen::VectorXd lower = Eigen::Vector3d(-10.0, -10.0, 0.0);
  Eigen::VectorXd upper = Eigen::Vector3d(51.0, 60.0, 40.0);
  /// Std of Gaussian noise added to the reference states; 0 keeps it exact.
  double noise_std = 0.0;
  std::uint64_t noise_seed = 0;
};

OscillatorSetup lorenz_setup();
OscillatorSetup chen_setup();

CostProblem lorenz_problem(const OscillatorSetup& setup = lorenz_setup());
CostProblem chen_problem(const OscillatorSetup& setup = chen_setup());

CostProblem sphere(Eigen::Index n);
CostProblem rastrigin(Eigen::Index n);
CostProblem rosenbrock(Eigen::Index n);
CostProblem ackley(Eigen::Index n);

/// CSV with header `t,x1,...,xd` and one row per time point.
void write_reference_csv(std::ostream& out, const ReferenceTrajectory& reference);
void write_reference_csv(const std::string& path, const ReferenceTrajectory& reference);
ReferenceTrajectory read_reference_csv(std::istream& in);
ReferenceTrajectory read_reference_csv(const std::string& path);

}  // namespace mreo
