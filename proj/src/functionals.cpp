#include "wcd/functionals.hpp"

#include <algorithm>
#include <cmath>

#include "wcd/errors.hpp"

namespace wcd {

namespace {

std::vector<double> diagonal_of(const Matrix& m) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[static_cast<std::size_t>(i)] = m(i, i);
  return out;
}

double quad_form(const Matrix& m, std::span<const double> x) {
  const std::size_t d = x.size();
  double total = 0.0;
  for (std::size_t a = 0; a < d; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < d; ++b) row += m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * x[b];
    total += x[a] * row;
  }
  return total;
}

double row_dot(const Matrix& m, std::size_t i, std::span<const double> x) {
  double total = 0.0;
  for (std::size_t b = 0; b < x.size(); ++b) total += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(b)) * x[b];
  return total;
}

}  // namespace

// ---------------------------------------------------------------------------
// Quadratic potential

QuadraticPotential::QuadraticPotential(Matrix p) : p_(std::move(p)) {
  require_symmetric_psd(p_, "potential matrix P");
  profile_ = SmoothnessProfile(spectral_norm_symmetric(p_), diagonal_of(p_));
}

double QuadraticPotential::energy(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  double total = 0.0;
  for (std::size_t n = 0; n < mu.size(); ++n) total += 0.5 * quad_form(p_, mu.row(n));
  return total / static_cast<double>(mu.size());
}

GradientField QuadraticPotential::grad(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  GradientField g(mu.size(), mu.dim());
  for (std::size_t n = 0; n < mu.size(); ++n)
    for (std::size_t i = 0; i < mu.dim(); ++i) g(n, i) = row_dot(p_, i, mu.row(n));
  return g;
}

std::vector<double> QuadraticPotential::coord_grad(const ParticleEnsemble& mu, std::size_t i) const {
  check_ensemble(mu);
  check_coordinate(i);
  std::vector<double> g(mu.size());
  for (std::size_t n = 0; n < mu.size(); ++n) g[n] = row_dot(p_, i, mu.row(n));
  return g;
}

// ---------------------------------------------------------------------------
// Quadratic interaction

QuadraticInteraction::QuadraticInteraction(Matrix q) : q_(std::move(q)) {
  require_symmetric_psd(q_, "interaction matrix Q");
  profile_ = SmoothnessProfile(spectral_norm_symmetric(q_), diagonal_of(q_));
}

double QuadraticInteraction::energy(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  const auto mean = barycenter(mu);
  std::vector<double> centred(mu.dim());
  double total = 0.0;
  for (std::size_t n = 0; n < mu.size(); ++n) {
    auto x = mu.row(n);
    for (std::size_t j = 0; j < mu.dim(); ++j) centred[j] = x[j] - mean[j];
    total += quad_form(q_, centred);
  }
  return total / (4.0 * static_cast<double>(mu.size()));
}

GradientField QuadraticInteraction::grad(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  const auto mean = barycenter(mu);
  std::vector<double> centred(mu.dim());
  GradientField g(mu.size(), mu.dim());
  for (std::size_t n = 0; n < mu.size(); ++n) {
    auto x = mu.row(n);
    for (std::size_t j = 0; j < mu.dim(); ++j) centred[j] = x[j] - mean[j];
    for (std::size_t i = 0; i < mu.dim(); ++i) g(n, i) = 0.5 * row_dot(q_, i, centred);
  }
  return g;
}

std::vector<double> QuadraticInteraction::coord_grad(const ParticleEnsemble& mu, std::size_t i) const {
  check_ensemble(mu);
  check_coordinate(i);
  const auto mean = barycenter(mu);
  std::vector<double> centred(mu.dim());
  std::vector<double> g(mu.size());
  for (std::size_t n = 0; n < mu.size(); ++n) {
    auto x = mu.row(n);
    for (std::size_t j = 0; j < mu.dim(); ++j) centred[j] = x[j] - mean[j];
    g[n] = 0.5 * row_dot(q_, i, centred);
  }
  return g;
}

// ---------------------------------------------------------------------------
// MMD

MmdEnergy::MmdEnergy(ParticleEnsemble target, std::vector<double> rates)
    : target_(std::move(target)), rates_(std::move(rates)) {
  if (rates_.size() != target_.dim()) throw DimensionError("MMD needs one kernel rate per coordinate");
  for (double l : rates_) {
    if (!(l > 0.0)) throw ConfigError("MMD kernel rates must be positive");
  }
  const std::size_t m = target_.size();
  double self = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) self += kernel(target_.row(a), target_.row(b));
  target_self_term_ = self / static_cast<double>(m * m);

  std::vector<double> coord(rates_.size());
  for (std::size_t i = 0; i < rates_.size(); ++i) coord[i] = 4.0 * rates_[i];
  profile_ = SmoothnessProfile(4.0 * *std::max_element(rates_.begin(), rates_.end()), std::move(coord));
}

double MmdEnergy::kernel(std::span<const double> x, std::span<const double> y) const {
  double exponent = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double z = x[j] - y[j];
    exponent += rates_[j] * z * z;
  }
  return std::exp(-0.5 * exponent);
}

double MmdEnergy::energy(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  const std::size_t n = mu.size();
  const std::size_t m = target_.size();
  double xx = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) xx += kernel(mu.row(a), mu.row(b));
  double xy = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < m; ++b) xy += kernel(mu.row(a), target_.row(b));
  xx /= static_cast<double>(n * n);
  xy /= static_cast<double>(n * m);
  return 0.5 * (xx - 2.0 * xy + target_self_term_);
}

GradientField MmdEnergy::grad(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  const std::size_t n = mu.size();
  const std::size_t m = target_.size();
  const std::size_t d = dim();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  GradientField g(n, d);
  std::vector<double> acc_x(d), acc_y(d);
  for (std::size_t a = 0; a < n; ++a) {
    auto x = mu.row(a);
    std::fill(acc_x.begin(), acc_x.end(), 0.0);
    std::fill(acc_y.begin(), acc_y.end(), 0.0);
    for (std::size_t b = 0; b < n; ++b) {
      auto y = mu.row(b);
      const double k = kernel(x, y);
      for (std::size_t j = 0; j < d; ++j) acc_x[j] += (x[j] - y[j]) * k;
    }
    for (std::size_t b = 0; b < m; ++b) {
      auto y = target_.row(b);
      const double k = kernel(x, y);
      for (std::size_t j = 0; j < d; ++j) acc_y[j] += (x[j] - y[j]) * k;
    }
    for (std::size_t j = 0; j < d; ++j) g(a, j) = -rates_[j] * (inv_n * acc_x[j] - inv_m * acc_y[j]);
  }
  return g;
}

std::vector<double> MmdEnergy::coord_grad(const ParticleEnsemble& mu, std::size_t i) const {
  check_ensemble(mu);
  check_coordinate(i);
  const std::size_t n = mu.size();
  const std::size_t m = target_.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_m = 1.0 / static_cast<double>(m);
  std::vector<double> g(n);
  for (std::size_t a = 0; a < n; ++a) {
    auto x = mu.row(a);
    double acc_x = 0.0, acc_y = 0.0;
    for (std::size_t b = 0; b < n; ++b) {
      auto y = mu.row(b);
      acc_x += (x[i] - y[i]) * kernel(x, y);
    }
    for (std::size_t b = 0; b < m; ++b) {
      auto y = target_.row(b);
      acc_y += (x[i] - y[i]) * kernel(x, y);
    }
    g[a] = -rates_[i] * (inv_n * acc_x - inv_m * acc_y);
  }
  return g;
}

// ---------------------------------------------------------------------------
// Function of the mean

FunctionOfMean::FunctionOfMean(Matrix a) : a_(std::move(a)) {
  if (a_.rows() == 0 || a_.rows() != a_.cols()) throw ConfigError("mean-function matrix must be square");
  if (!is_symmetric(a_)) throw ConfigError("mean-function matrix is not symmetric");
  profile_ = SmoothnessProfile(spectral_norm_symmetric(a_), diagonal_of(a_));
}

double FunctionOfMean::energy(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  return 0.5 * quad_form(a_, barycenter(mu));
}

GradientField FunctionOfMean::grad(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  const auto mean = barycenter(mu);
  GradientField g(mu.size(), mu.dim());
  for (std::size_t i = 0; i < mu.dim(); ++i) {
    const double gi = row_dot(a_, i, mean);
    for (std::size_t n = 0; n < mu.size(); ++n) g(n, i) = gi;
  }
  return g;
}

std::vector<double> FunctionOfMean::coord_grad(const ParticleEnsemble& mu, std::size_t i) const {
  check_ensemble(mu);
  check_coordinate(i);
  return std::vector<double>(mu.size(), row_dot(a_, i, barycenter(mu)));
}

// ---------------------------------------------------------------------------
// Smoothed l1 regularizer

namespace {

class SmoothedL1Line final : public CoordinateLine {
 public:
  SmoothedL1Line(std::vector<double> u, std::vector<double> column, const std::vector<double>& weights,
                 double eps)
      : u_(std::move(u)), column_(std::move(column)), weights_(weights), eps_sq_(eps * eps) {}

  LinePoint at(double s) const override {
    LinePoint p{0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < u_.size(); ++j) {
      const double uj = u_[j] + s * column_[j];
      const double root = std::sqrt(uj * uj + eps_sq_);
      p.value += weights_[j] * root;
      p.slope += weights_[j] * column_[j] * uj / root;
      p.curvature += weights_[j] * column_[j] * column_[j] * eps_sq_ / (root * root * root);
    }
    return p;
  }

 private:
  std::vector<double> u_;
  std::vector<double> column_;
  const std::vector<double>& weights_;
  double eps_sq_;
};

}  // namespace

SmoothedL1Potential::SmoothedL1Potential(std::vector<double> weights, Matrix mixing, double eps)
    : weights_(std::move(weights)), a_(std::move(mixing)), eps_(eps) {
  const auto d = static_cast<Eigen::Index>(weights_.size());
  if (d == 0) throw ConfigError("smoothed l1 needs at least one weight");
  if (a_.rows() != d || a_.cols() != d) throw DimensionError("mixing matrix must be d x d");
  if (!(eps_ > 0.0)) throw ConfigError("smoothing eps must be positive");
  for (double r : weights_) {
    if (!(r >= 0.0)) throw ConfigError("smoothed l1 weights must be nonnegative");
  }
  if ((a_.transpose() * a_ - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > 1e-8) {
    throw ConfigError("mixing matrix is not orthogonal");
  }
  std::vector<double> h(weights_.size(), 0.0);
  for (Eigen::Index i = 0; i < d; ++i) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) total += weights_[static_cast<std::size_t>(j)] * a_(j, i) * a_(j, i);
    h[static_cast<std::size_t>(i)] = total / eps_;
  }
  profile_ = SmoothnessProfile(*std::max_element(weights_.begin(), weights_.end()) / eps_, std::move(h));
}

void SmoothedL1Potential::rotate(std::span<const double> x, std::span<double> u) const {
  const std::size_t d = weights_.size();
  for (std::size_t j = 0; j < d; ++j) u[j] = row_dot(a_, j, x);
}

double SmoothedL1Potential::potential(std::span<const double> x) const {
  std::vector<double> u(weights_.size());
  rotate(x, u);
  double total = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) total += weights_[j] * std::sqrt(u[j] * u[j] + eps_ * eps_);
  return total;
}

void SmoothedL1Potential::potential_gradient(std::span<const double> x, std::span<double> out) const {
  const std::size_t d = weights_.size();
  std::vector<double> u(d);
  rotate(x, u);
  for (std::size_t j = 0; j < d; ++j) u[j] = weights_[j] * u[j] / std::sqrt(u[j] * u[j] + eps_ * eps_);
  for (std::size_t i = 0; i < d; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) total += a_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * u[j];
    out[i] = total;
  }
}

Matrix SmoothedL1Potential::potential_hessian(std::span<const double> x) const {
  const std::size_t d = weights_.size();
  std::vector<double> u(d);
  rotate(x, u);
  Vector c(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    const double root = std::sqrt(u[j] * u[j] + eps_ * eps_);
    c(static_cast<Eigen::Index>(j)) = weights_[j] * eps_ * eps_ / (root * root * root);
  }
  return a_.transpose() * c.asDiagonal() * a_;
}

std::unique_ptr<CoordinateLine> SmoothedL1Potential::line(std::span<const double> x, std::size_t i) const {
  check_coordinate(i);
  const std::size_t d = weights_.size();
  std::vector<double> u(d), column(d);
  rotate(x, u);
  for (std::size_t j = 0; j < d; ++j) column[j] = a_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
  return std::make_unique<SmoothedL1Line>(std::move(u), std::move(column), weights_, eps_);
}

double SmoothedL1Potential::minimum_value() const {
  double total = 0.0;
  for (double r : weights_) total += r;
  return eps_ * total;
}

double SmoothedL1Potential::energy(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  double total = 0.0;
  for (std::size_t n = 0; n < mu.size(); ++n) total += potential(mu.row(n));
  return total / static_cast<double>(mu.size());
}

GradientField SmoothedL1Potential::grad(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  GradientField g(mu.size(), mu.dim());
  for (std::size_t n = 0; n < mu.size(); ++n) potential_gradient(mu.row(n), g.row(n));
  return g;
}

std::vector<double> SmoothedL1Potential::coord_grad(const ParticleEnsemble& mu, std::size_t i) const {
  check_ensemble(mu);
  check_coordinate(i);
  const std::size_t d = weights_.size();
  std::vector<double> u(d);
  std::vector<double> g(mu.size());
  for (std::size_t n = 0; n < mu.size(); ++n) {
    rotate(mu.row(n), u);
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double w = weights_[j] * u[j] / std::sqrt(u[j] * u[j] + eps_ * eps_);
      total += a_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) * w;
    }
    g[n] = total;
  }
  return g;
}

// ---------------------------------------------------------------------------

std::shared_ptr<QuadraticPotential> quadratic_potential(Matrix p) {
  return std::make_shared<QuadraticPotential>(std::move(p));
}
std::shared_ptr<QuadraticInteraction> quadratic_interaction(Matrix q) {
  return std::make_shared<QuadraticInteraction>(std::move(q));
}
std::shared_ptr<MmdEnergy> mmd_energy(ParticleEnsemble target, std::vector<double> rates) {
  return std::make_shared<MmdEnergy>(std::move(target), std::move(rates));
}
std::shared_ptr<FunctionOfMean> function_of_mean(Matrix a) {
  return std::make_shared<FunctionOfMean>(std::move(a));
}
std::shared_ptr<SmoothedL1Potential> smoothed_l1_potential(std::vector<double> weights, Matrix mixing,
                                                           double eps) {
  return std::make_shared<SmoothedL1Potential>(std::move(weights), std::move(mixing), eps);
}

}  // namespace wcd
