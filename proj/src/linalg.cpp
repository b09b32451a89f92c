#include "wcd/linalg.hpp"

#include <cmath>
#include <string>

#include "wcd/errors.hpp"

namespace wcd {

double spectral_norm_symmetric(const Matrix& m, double tol, int max_iter) {
  const Eigen::Index d = m.rows();
  if (d == 0) return 0.0;
  // Deterministic start with no special alignment to coordinate axes.
  Vector v(d);
  for (Eigen::Index k = 0; k < d; ++k) v(k) = 1.0 + 0.1 * static_cast<double>(k % 7);
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vector w = m * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    // |v' M v| converges to the dominant |eigenvalue|; |Mv| is used since the
    // dominant eigenvalue may be negative.
    if (it > 0 && std::abs(norm - estimate) <= tol * norm) return norm;
    estimate = norm;
    v = w / norm;
  }
  return estimate;
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double min_eigenvalue_symmetric(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void require_symmetric_psd(const Matrix& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw ConfigError(std::string(what) + " must be a nonempty square matrix");
  }
  if (!is_symmetric(m)) throw ConfigError(std::string(what) + " is not symmetric");
  if (min_eigenvalue_symmetric(m) < -1e-8) {
    throw ConfigError(std::string(what) + " is not positive semidefinite");
  }
}

std::vector<double> log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > 0.0)) throw ConfigError("log_spaced needs positive endpoints");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = std::pow(10.0, a + (b - a) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

Matrix sign_fixed_q(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), m.cols());
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    if (r(j, j) < 0.0) q.col(j) *= -1.0;
  }
  return q;
}

Matrix random_orthogonal(std::size_t d, Rng& rng, double mixing) {
  const auto n = static_cast<Eigen::Index>(d);
  Matrix g(n, n);
  // Row-major draw order so the construction is stable if storage order changes.
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = rng.normal();
  if (mixing > 0.0) g = Matrix::Identity(n, n) + mixing * g;
  return sign_fixed_q(g);
}

}  // namespace wcd
