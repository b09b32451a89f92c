#pragma once

#include <Eigen/Dense>
#include <vector>

#include "wcd/rng.hpp"

namespace wcd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest |eigenvalue| of a symmetric matrix by power iteration.
/// Stops when successive Rayleigh estimates agree to `tol` (relative) or after `max_iter`.
double spectral_norm_symmetric(const Matrix& m, double tol = 1e-10, int max_iter = 10'000);

bool is_symmetric(const Matrix& m, double tol = 1e-10);
double min_eigenvalue_symmetric(const Matrix& m);

/// Throws ConfigError unless m is square, symmetric within 1e-10 and PSD
/// (smallest eigenvalue >= -1e-8).
void require_symmetric_psd(const Matrix& m, const char* what);

/// `count` values equally spaced in log10 between lo and hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t count);

/// Q factor of a Householder QR with columns sign-fixed so diag(R) > 0.
Matrix sign_fixed_q(const Matrix& m);

/// Orthogonal matrix from the QR of a standard Gaussian d x d draw.
/// With mixing > 0 the QR input is I + mixing * G instead, giving a rotation
/// close to the identity whose entries are all nonzero.
Matrix random_orthogonal(std::size_t d, Rng& rng, double mixing = 0.0);

}  // namespace wcd
