#pragma once

#include "homocon/types.hpp"

namespace homocon::linalg {

/// Eigenvalues of a symmetric matrix in ascending order.
Eigen::VectorXd sym_eigenvalues(const Eigen::MatrixXd& s);

double lambda_min(const Eigen::MatrixXd& s);
double lambda_max(const Eigen::MatrixXd& s);

/// Symmetric square root of a positive semidefinite matrix.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& s);

/// P^{-1/2} for P positive definite.
Eigen::MatrixXd inv_sqrt_pd(const Eigen::MatrixXd& p);

double spectral_norm(const Eigen::MatrixXd& m);
double min_singular_value(const Eigen::MatrixXd& m);

/// ||M - M^T|| <= tol * ||M|| (Frobenius).
bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

/// Solves A^T X + X A = -Q via Kronecker vectorisation (small n only).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// Nearest symmetric matrix with spectrum clipped to [floor, inf).
Eigen::MatrixXd clip_spectrum_below(const Eigen::MatrixXd& s, double floor);

}  // namespace homocon::linalg
