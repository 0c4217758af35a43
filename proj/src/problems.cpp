#include "mreo/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <utility>

#include "mreo/errors.hpp"
#include "mreo/rng.hpp"

namespace mreo {
namespace {

// Shared by rk4_step, integrate and trajectory_cost so that the reference and
// candidate simulations follow the same arithmetic.
bool rk4_advance(const OdeModel& model, const Eigen::VectorXd& params, Eigen::VectorXd& x,
                 double t, double dt) {
  const Eigen::VectorXd k1 = model.field(x, t, params);
  const Eigen::VectorXd k2 = model.field(x + 0.5 * dt * k1, t + 0.5 * dt, params);
  const Eigen::VectorXd k3 = model.field(x + 0.5 * dt * k2, t + 0.5 * dt, params);
  const Eigen::VectorXd k4 = model.field(x + dt * k3, t + dt, params);
  if (!(k1.allFinite() && k2.allFinite() && k3.allFinite() && k4.allFinite())) return false;
  x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  return x.allFinite();
}

std::string describe(const Eigen::VectorXd& x) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x(k);
  os << ')';
  return os.str();
}

Eigen::VectorXd filled(Eigen::Index n, double v) { return Eigen::VectorXd::Constant(n, v); }

}  // namespace

Eigen::Vector3d lorenz_field(const Eigen::Vector3d& x, const Eigen::Vector3d& theta) {
  return {theta(0) * (x(1) - x(0)), theta(1) * x(0) - x(1) - x(0) * x(2),
          x(0) * x(1) - theta(2) * x(2)};
}

Eigen::Vector3d chen_field(const Eigen::Vector3d& x, const Eigen::Vector3d& theta) {
  return {theta(0) * (x(1) - x(0)), (theta(2) - theta(0)) * x(0) + theta(2) * x(1) - x(0) * x(2),
          x(0) * x(1) - theta(1) * x(2)};
}

OdeModel lorenz_model() {
  return {"lorenz", 3, 3, [](const Eigen::VectorXd& x, double, const Eigen::VectorXd& th) {
            return Eigen::VectorXd(lorenz_field(x, th));
          }};
}

OdeModel chen_model() {
  return {"chen", 3, 3, [](const Eigen::VectorXd& x, double, const Eigen::VectorXd& th) {
            return Eigen::VectorXd(chen_field(x, th));
          }};
}

Eigen::VectorXd rk4_step(const OdeModel& model, const Eigen::VectorXd& params,
                         const Eigen::VectorXd& x, double t, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("rk4_step: dt must be positive");
  Eigen::VectorXd next = x;
  if (!rk4_advance(model, params, next, t, dt))
    throw IntegrationBlowup(t, "rk4_step: non-finite stage at t = " + std::to_string(t) +
                                   ", x = " + describe(x));
  return next;
}

ReferenceTrajectory integrate(const OdeModel& model, const Eigen::VectorXd& params,
                              const Eigen::VectorXd& x0, double t0, double t_end, double dt) {
  if (!(dt > 0.0)) throw InvalidParameter("integrate: dt must be positive");
  if (!(t_end > t0)) throw InvalidParameter("integrate: empty time span");
  if (x0.size() != model.state_dim)
    throw InvalidArgument("integrate: x0 has the wrong dimension for model " + model.label);
  const double span = t_end - t0;
  const auto steps = static_cast<Eigen::Index>(std::llround(span / dt));
  if (steps < 1 || std::abs(static_cast<double>(steps) * dt - span) > 1e-9 * std::max(1.0, span))
    throw InvalidParameter("integrate: time span is not a whole number of steps");

  ReferenceTrajectory out;
  out.true_params = params;
  out.times.resize(static_cast<std::size_t>(steps + 1));
  out.states.resize(steps + 1, model.state_dim);
  Eigen::VectorXd x = x0;
  out.times[0] = t0;
  out.states.row(0) = x.transpose();
  for (Eigen::Index i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    if (!rk4_advance(model, params, x, t, dt))
      throw IntegrationBlowup(t, "integrate: non-finite state at t = " + std::to_string(t));
    out.times[static_cast<std::size_t>(i + 1)] = t0 + static_cast<double>(i + 1) * dt;
    out.states.row(i + 1) = x.transpose();
  }
  return out;
}

double trajectory_cost(const OdeModel& model, const ReferenceTrajectory& reference,
                       const Eigen::VectorXd& params) {
  const Eigen::Index steps = reference.steps();
  const double t0 = reference.times.front();
  const double dt = reference.dt();
  Eigen::VectorXd x = reference.states.row(0).transpose();
  double cost = 0.0;  // row 0 matches exactly: same x0
  for (Eigen::Index i = 0; i < steps; ++i) {
    const double t = t0 + static_cast<double>(i) * dt;
    if (!rk4_advance(model, params, x, t, dt) || x.lpNorm<Eigen::Infinity>() > kBlowupMagnitude) {
      const double completed = static_cast<double>(i) / static_cast<double>(steps);
      return 1e18 - completed * 1e16;
    }
    cost += (reference.states.row(i + 1).transpose() - x).squaredNorm();
  }
  return cost;
}

CostProblem recovery_problem(std::string name, OdeModel model,
                             std::shared_ptr<const ReferenceTrajectory> reference,
                             Eigen::VectorXd lower, Eigen::VectorXd upper) {
  if (!reference || reference->states.rows() < 2)
    throw InvalidArgument("recovery_problem: reference trajectory needs at least two points");
  if (reference->states.cols() != model.state_dim)
    throw InvalidArgument("recovery_problem: reference state dimension does not match model");
  if (lower.size() != model.param_dim || upper.size() != model.param_dim)
    throw InvalidBounds("recovery_problem: bounds must have one entry per parameter");
  CostProblem p;
  p.name = std::move(name);
  p.lower = std::move(lower);
  p.upper = std::move(upper);
  p.optimum = reference->true_params;
  p.optimum_cost = 0.0;
  p.parameter_recovery = true;
  p.eval = [model = std::move(model), reference](const Eigen::VectorXd& theta) {
    return trajectory_cost(model, *reference, theta);
  };
  return p;
}

OscillatorSetup lorenz_setup() {
  OscillatorSetup s;
  s.true_params = Eigen::Vector3d(10.0, 28.0, 8.0 / 3.0);
  return s;
}

OscillatorSetup chen_setup() {
  OscillatorSetup s;
  s.true_params = Eigen::Vector3d(35.0, 3.0, 28.0);
  return s;
}

ReferenceTrajectory with_measurement_noise(ReferenceTrajectory reference, double sigma,
                                           std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidParameter("with_measurement_noise: sigma must be finite and non-negative");
  if (sigma == 0.0) return reference;
  Rng rng = Rng::stream(seed, Rng::Purpose::kUser);
  for (Eigen::Index i = 1; i < reference.states.rows(); ++i)
    for (Eigen::Index k = 0; k < reference.states.cols(); ++k)
      reference.states(i, k) += sigma * rng.normal();
  return reference;
}

namespace {
CostProblem oscillator_problem(const std::string& name, const OdeModel& model,
                               const OscillatorSetup& setup) {
  auto ref = std::make_shared<const ReferenceTrajectory>(with_measurement_noise(
      integrate(model, setup.true_params, setup.x0, 0.0, setup.t_end, setup.dt), setup.noise_std,
      setup.noise_seed));
  return recovery_problem(name, model, std::move(ref), setup.lower, setup.upper);
}
}  // namespace

CostProblem lorenz_problem(const OscillatorSetup& setup) {
  return oscillator_problem("lorenz", lorenz_model(), setup);
}

CostProblem chen_problem(const OscillatorSetup& setup) {
  return oscillator_problem("chen", chen_model(), setup);
}

CostProblem sphere(Eigen::Index n) {
  if (n < 1) throw InvalidParameter("sphere: dimension must be at least 1");
  return {"sphere", filled(n, -5.0), filled(n, 5.0),
          [](const Eigen::VectorXd& x) { return x.squaredNorm(); }, Eigen::VectorXd::Zero(n),
          0.0, false};
}

CostProblem rastrigin(Eigen::Index n) {
  if (n < 1) throw InvalidParameter("rastrigin: dimension must be at least 1");
  return {"rastrigin", filled(n, -5.12), filled(n, 5.12),
          [](const Eigen::VectorXd& x) {
            double s = 10.0 * static_cast<double>(x.size());
            for (Eigen::Index k = 0; k < x.size(); ++k)
              s += x(k) * x(k) - 10.0 * std::cos(2.0 * std::numbers::pi * x(k));
            return s;
          },
          Eigen::VectorXd::Zero(n), 0.0, false};
}

CostProblem rosenbrock(Eigen::Index n) {
  if (n < 1) throw InvalidParameter("rosenbrock: dimension must be at least 1");
  return {"rosenbrock", filled(n, -5.0), filled(n, 10.0),
          [](const Eigen::VectorXd& x) {
            double s = 0.0;
            for (Eigen::Index k = 0; k + 1 < x.size(); ++k) {
              const double a = x(k + 1) - x(k) * x(k);
              const double b = 1.0 - x(k);
              s += 100.0 * a * a + b * b;
            }
            return s;
          },
          Eigen::VectorXd::Ones(n), 0.0, false};
}

CostProblem ackley(Eigen::Index n) {
  if (n < 1) throw InvalidParameter("ackley: dimension must be at least 1");
  return {"ackley", filled(n, -32.768), filled(n, 32.768),
          [](const Eigen::VectorXd& x) {
            const double d = static_cast<double>(x.size());
            double sq = 0.0, cs = 0.0;
            for (Eigen::Index k = 0; k < x.size(); ++k) {
              sq += x(k) * x(k);
              cs += std::cos(2.0 * std::numbers::pi * x(k));
            }
            return -20.0 * std::exp(-0.2 * std::sqrt(sq / d)) - std::exp(cs / d) + 20.0 +
                   std::numbers::e;
          },
          Eigen::VectorXd::Zero(n), 0.0, false};
}

void write_reference_csv(std::ostream& out, const ReferenceTrajectory& reference) {
  out << 't';
  for (Eigen::Index k = 0; k < reference.states.cols(); ++k) out << ",x" << (k + 1);
  out << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < reference.states.rows(); ++i) {
    out << reference.times[static_cast<std::size_t>(i)];
    for (Eigen::Index k = 0; k < reference.states.cols(); ++k) out << ',' << reference.states(i, k);
    out << '\n';
  }
}

void write_reference_csv(const std::string& path, const ReferenceTrajectory& reference) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open " + path + " for writing");
  write_reference_csv(out, reference);
}

ReferenceTrajectory read_reference_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != 't')
    throw InvalidArgument("reference csv: missing 't,x1,...' header");
  const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ','));
  if (columns < 1) throw InvalidArgument("reference csv: no state columns");

  std::vector<double> times;
  std::vector<double> values;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    Eigen::Index count = 0;
    while (std::getline(row, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || !std::isfinite(v))
        throw InvalidArgument("reference csv: bad number on line " + std::to_string(lineno));
      (count == 0 ? times : values).push_back(v);
      ++count;
    }
    if (count != columns + 1)
      throw InvalidArgument("reference csv: wrong column count on line " + std::to_string(lineno));
  }
  if (times.size() < 2) throw InvalidArgument("reference csv: need at least two rows");
  const double dt = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i) {
    const double step = times[i] - times[i - 1];
    if (!(step > 0.0) || std::abs(step - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
      throw InvalidArgument("reference csv: times must be strictly increasing with constant step");
  }
  ReferenceTrajectory ref;
  ref.times = std::move(times);
  ref.states = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(ref.times.size()), columns);
  return ref;
}

ReferenceTrajectory read_reference_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  return read_reference_csv(in);
}

}  // namespace mreo
