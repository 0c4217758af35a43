#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "mreo/ensemble.hpp"

namespace mreo {

/// (1+n) x N; column j stacks f_hat - f_j over x_{partner(j)} - x_j.
using InnovationMatrix = Eigen::MatrixXd;
/// n x (1+n) derivative-free directional coefficient.
using GainMatrix = Eigen::MatrixXd;

/// Block-diagonal noise covariance diag(rho^2, rho_c rho_c^T) with diagonal rho_c.
class NoiseBlock {
 public:
  NoiseBlock(double rho, const Eigen::VectorXd& rho_c);
  /// Any symmetric positive definite matrix.
  explicit NoiseBlock(Eigen::MatrixXd gamma_gamma_t);

  const Eigen::MatrixXd& matrix() const noexcept { return gamma_gamma_t_; }
  Eigen::Index size() const noexcept { return gamma_gamma_t_.rows(); }

 private:
  Eigen::MatrixXd gamma_gamma_t_;
};

InnovationMatrix build_innovations(const Ensemble& ensemble, const CostVector& costs, double f_hat,
                                   const std::vector<Eigen::Index>& partners);

/// alpha * S + (1 - alpha) * gamma gamma^T, S the 1/(N-1) sample covariance of
/// the columns of `spread`.
Eigen::MatrixXd blended_covariance(const Eigen::MatrixXd& spread, double alpha,
                                   const NoiseBlock& noise);

/// Jittered inverse of a symmetric matrix. With D = diag(M)^-1/2 and the
/// unit-diagonal R = D M D, returns D (R + eps I)^-1 D where
/// eps = max(0, eps0 - lambda_min(R)) and eps0 = 1e-10 * (1 + trace(R) / dim).
/// Exact (to rounding) when R is well conditioned.
Eigen::MatrixXd regularized_inverse(const Eigen::MatrixXd& m);

struct GainInputs {
  const Ensemble& prev_ensemble;
  const Ensemble& cur_ensemble;
  /// Functional matrices F of the previous and current iteration, (1+n) x N.
  const Eigen::MatrixXd& prev_functional;
  const Eigen::MatrixXd& cur_functional;
  /// Increment subtracted in the time-weighted factor, same shape as F.
  const Eigen::MatrixXd& increment;
  double tau_prev;
  double tau_cur;
  const Eigen::MatrixXd& blended_cov;
};

/// G = (1/N) { (X - Xbar)(F^T tau - F_prev^T tau_prev - dF^T tau)
///           + (Xbar tau - Xbar_prev tau_prev)(F - Fbar)^T } C^-1
///
/// Xbar broadcasts the column mean, F is the functional matrix, dF the increment and
/// C^-1 the regularized inverse of the blended covariance.
GainMatrix gain(const GainInputs& in);

/// Functional matrix for the gain: the innovations, or (f_hat ; 0) minus them.
Eigen::MatrixXd functional_matrix(FunctionalForm form, const InnovationMatrix& innovations,
                                  double f_hat);

/// Increment for the time-weighted gain factor.
Eigen::MatrixXd gain_increment(IncrementForm form, const Eigen::MatrixXd& cur,
                               const Eigen::MatrixXd& prev, double f_hat, double delta_tau);

/// Column j is beta * G * I_j.
Eigen::MatrixXd corrections(const GainMatrix& gain, double beta, const InnovationMatrix& innovations);

/// Column j of the result is column sigma2[j] of the input.
Eigen::MatrixXd scramble(const Eigen::MatrixXd& corrections, const std::vector<Eigen::Index>& sigma2);

/// floor(1 / ||gamma gamma^T||_2), saturating at INT64_MAX. Diagnostic only.
std::int64_t perturbation_index(const NoiseBlock& noise);

}  // namespace mreo
