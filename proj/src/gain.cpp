#include "mreo/gain.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "mreo/errors.hpp"

namespace mreo {
namespace {

void require_shape(const Eigen::MatrixXd& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (m.rows() != rows || m.cols() != cols)
    throw InvalidArgument(std::string("gain: ") + what + " is " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                          std::to_string(cols));
}

Eigen::MatrixXd centered(const Eigen::MatrixXd& m) {
  const Eigen::VectorXd mean = m.rowwise().mean();
  return m.colwise() - mean;
}

}  // namespace

NoiseBlock::NoiseBlock(double rho, const Eigen::VectorXd& rho_c) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw InvalidParameter("NoiseBlock: rho must be positive and finite");
  if (!rho_c.allFinite() || (rho_c.array() <= 0.0).any())
    throw InvalidParameter("NoiseBlock: rho_c entries must be positive and finite");
  const Eigen::Index n = rho_c.size();
  gamma_gamma_t_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
  gamma_gamma_t_(0, 0) = rho * rho;
  gamma_gamma_t_.bottomRightCorner(n, n).diagonal() = rho_c.array().square().matrix();
}

NoiseBlock::NoiseBlock(Eigen::MatrixXd gamma_gamma_t) : gamma_gamma_t_(std::move(gamma_gamma_t)) {
  if (gamma_gamma_t_.rows() != gamma_gamma_t_.cols() || gamma_gamma_t_.rows() == 0)
    throw InvalidParameter("NoiseBlock: matrix must be square and non-empty");
  if (!gamma_gamma_t_.allFinite()) throw InvalidParameter("NoiseBlock: non-finite entries");
  if (!gamma_gamma_t_.isApprox(gamma_gamma_t_.transpose(), 1e-12))
    throw InvalidParameter("NoiseBlock: matrix must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(gamma_gamma_t_);
  if (llt.info() != Eigen::Success) throw InvalidParameter("NoiseBlock: matrix must be positive definite");
}

InnovationMatrix build_innovations(const Ensemble& ensemble, const CostVector& costs, double f_hat,
                                   const std::vector<Eigen::Index>& partners) {
  const Eigen::Index n = ensemble.rows();
  const Eigen::Index count = ensemble.cols();
  if (count < 2) throw DegenerateEnsemble("build_innovations: coalescence needs N >= 2");
  if (costs.size() != count) throw InvalidArgument("build_innovations: costs do not match ensemble");
  if (static_cast<Eigen::Index>(partners.size()) != count)
    throw InvalidArgument("build_innovations: partner sequence has the wrong length");

  InnovationMatrix out(n + 1, count);
  for (Eigen::Index j = 0; j < count; ++j) {
    const Eigen::Index p = partners[static_cast<std::size_t>(j)];
    if (p < 0 || p >= count || p == j)
      throw InvalidArgument("build_innovations: invalid partner for column " + std::to_string(j));
    out(0, j) = f_hat - costs(j);
    out.col(j).tail(n) = ensemble.col(p) - ensemble.col(j);
  }
  return out;
}

Eigen::MatrixXd blended_covariance(const Eigen::MatrixXd& spread, double alpha,
                                   const NoiseBlock& noise) {
  if (spread.cols() < 2) throw DegenerateEnsemble("blended_covariance: needs N >= 2");
  if (spread.rows() != noise.size())
    throw InvalidArgument("blended_covariance: innovation rows do not match the noise block");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw InvalidParameter("blended_covariance: alpha must lie strictly inside (0, 1)");
  const Eigen::MatrixXd dev = centered(spread);
  Eigen::MatrixXd s = (dev * dev.transpose()) / static_cast<double>(spread.cols() - 1);
  Eigen::MatrixXd out = alpha * s + (1.0 - alpha) * noise.matrix();
  // Enforce exact symmetry after the floating-point product.
  return 0.5 * (out + out.transpose());
}

Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw InvalidArgument("regularized_inverse: matrix must be square and non-empty");
  const Eigen::Index dim = m.rows();
  // Equilibrate to unit diagonal first: cost and coalescence rows can differ by
  // dozens of orders of magnitude, which no absolute jitter handles.
  Eigen::VectorXd scale(dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double d = m(k, k);
    scale(k) = d > 0.0 && std::isfinite(d) ? 1.0 / std::sqrt(d) : 1.0;
  }
  Eigen::MatrixXd r = scale.asDiagonal() * m * scale.asDiagonal();
  r = 0.5 * (r + r.transpose());
  const double eps0 = 1e-10 * (1.0 + r.trace() / static_cast<double>(dim));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double eps = std::max(0.0, eps0 - lambda.minCoeff());
  const Eigen::VectorXd inv = (lambda.array() + eps).inverse().matrix();
  const Eigen::MatrixXd r_inv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  return scale.asDiagonal() * r_inv * scale.asDiagonal();
}

GainMatrix gain(const GainInputs& in) {
  const Eigen::Index n = in.cur_ensemble.rows();
  const Eigen::Index count = in.cur_ensemble.cols();
  const Eigen::Index m = in.cur_functional.rows();
  if (count < 2) throw DegenerateEnsemble("gain: needs N >= 2");
  require_shape(in.prev_ensemble, n, count, "previous ensemble");
  require_shape(in.cur_functional, m, count, "functional matrix");
  require_shape(in.prev_functional, m, count, "previous functional matrix");
  require_shape(in.increment, m, count, "increment");
  require_shape(in.blended_cov, m, m, "blended covariance");

  const Eigen::VectorXd mean = in.cur_ensemble.rowwise().mean();
  const Eigen::VectorXd prev_mean = in.prev_ensemble.rowwise().mean();

  // N x m time-weighted functional factor.
  const Eigen::MatrixXd weighted = in.cur_functional.transpose() * in.tau_cur -
                                   in.prev_functional.transpose() * in.tau_prev -
                                   in.increment.transpose() * in.tau_cur;
  const Eigen::MatrixXd spread = in.cur_ensemble.colwise() - mean;
  const Eigen::VectorXd drift = mean * in.tau_cur - prev_mean * in.tau_prev;

  // (drift * 1^T)(F - Fbar)^T == drift * (row sums of the centred F)^T
  const Eigen::RowVectorXd centred_sum = centered(in.cur_functional).rowwise().sum().transpose();
  const Eigen::MatrixXd cross = spread * weighted + drift * centred_sum;
  return (cross / static_cast<double>(count)) * regularized_inverse(in.blended_cov);
}

Eigen::MatrixXd functional_matrix(FunctionalForm form, const InnovationMatrix& innovations,
                                  double f_hat) {
  if (form == FunctionalForm::kInnovation) return innovations;
  Eigen::MatrixXd out = -innovations;
  out.row(0).array() += f_hat;
  return out;
}

Eigen::MatrixXd gain_increment(IncrementForm form, const Eigen::MatrixXd& cur,
                               const Eigen::MatrixXd& prev, double f_hat, double delta_tau) {
  if (cur.rows() != prev.rows() || cur.cols() != prev.cols())
    throw InvalidArgument("gain_increment: functional matrix shapes differ");
  switch (form) {
    case IncrementForm::kInnovationDifference:
      return cur - prev;
    case IncrementForm::kExtremalDrift: {
      Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cur.rows(), cur.cols());
      out.row(0).setConstant(f_hat * delta_tau);
      return out;
    }
  }
  throw InvalidParameter("gain_increment: unknown form");
}

Eigen::MatrixXd corrections(const GainMatrix& gain, double beta, const InnovationMatrix& innovations) {
  if (gain.cols() != innovations.rows())
    throw InvalidArgument("corrections: gain has " + std::to_string(gain.cols()) +
                          " columns but innovations have " + std::to_string(innovations.rows()) +
                          " rows");
  return beta * (gain * innovations);
}

Eigen::MatrixXd scramble(const Eigen::MatrixXd& corrections, const std::vector<Eigen::Index>& sigma2) {
  const Eigen::Index count = corrections.cols();
  if (static_cast<Eigen::Index>(sigma2.size()) != count)
    throw InvalidPermutation("scramble: permutation length does not match column count");
  std::vector<bool> seen(static_cast<std::size_t>(count), false);
  for (const Eigen::Index k : sigma2) {
    if (k < 0 || k >= count || seen[static_cast<std::size_t>(k)])
      throw InvalidPermutation("scramble: sigma2 is not a bijection");
    seen[static_cast<std::size_t>(k)] = true;
  }
  Eigen::MatrixXd out(corrections.rows(), count);
  for (Eigen::Index j = 0; j < count; ++j) out.col(j) = corrections.col(sigma2[static_cast<std::size_t>(j)]);
  return out;
}

std::int64_t perturbation_index(const NoiseBlock& noise) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(noise.matrix(), Eigen::EigenvaluesOnly);
  const double norm = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double inv = 1.0 / norm;
  if (!(inv < 9.2e18)) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(std::floor(inv));
}

}  // namespace mreo
