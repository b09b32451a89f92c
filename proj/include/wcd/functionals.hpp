#pragma once

#include <memory>
#include <vector>

#include "wcd/functional.hpp"

namespace wcd {

/// E[mu] = int 1/2 x'Px dmu. Gradient Px; L = |P|_2, L_i = P_ii.
class QuadraticPotential final : public EnergyFunctional {
 public:
  explicit QuadraticPotential(Matrix p);

  std::size_t dim() const override { return static_cast<std::size_t>(p_.rows()); }
  std::string name() const override { return "quadratic_potential"; }
  double energy(const ParticleEnsemble& mu) const override;
  GradientField grad(const ParticleEnsemble& mu) const override;
  std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const override;
  SmoothnessProfile smoothness() const override { return profile_; }

  const Matrix& matrix() const { return p_; }

 private:
  Matrix p_;
  SmoothnessProfile profile_;
};

/// E[mu] = 1/8 iint (x-y)'Q(x-y) dmu dmu. Gradient 1/2 int Q(x-y) dmu(y).
///
/// The pair sums are evaluated through the barycenter identity
/// sum_{n,m} (x_n-x_m)'Q(x_n-x_m) = 2N sum_n (x_n-xbar)'Q(x_n-xbar),
/// which is exact in real arithmetic and O(N d^2) instead of O(N^2 d^2).
class QuadraticInteraction final : public EnergyFunctional {
 public:
  explicit QuadraticInteraction(Matrix q);

  std::size_t dim() const override { return static_cast<std::size_t>(q_.rows()); }
  std::string name() const override { return "quadratic_interaction"; }
  double energy(const ParticleEnsemble& mu) const override;
  GradientField grad(const ParticleEnsemble& mu) const override;
  std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const override;
  SmoothnessProfile smoothness() const override { return profile_; }

  const Matrix& matrix() const { return q_; }

 private:
  Matrix q_;
  SmoothnessProfile profile_;
};

/// Squared MMD to a fixed particle target nu with the anisotropic Gaussian
/// kernel k(z) = exp(-1/2 sum_i lambda_i z_i^2). L_i = 4 lambda_i.
class MmdEnergy final : public EnergyFunctional {
 public:
  MmdEnergy(ParticleEnsemble target, std::vector<double> rates);

  std::size_t dim() const override { return target_.dim(); }
  std::string name() const override { return "mmd"; }
  double energy(const ParticleEnsemble& mu) const override;
  GradientField grad(const ParticleEnsemble& mu) const override;
  std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const override;
  SmoothnessProfile smoothness() const override { return profile_; }
  std::optional<double> known_minimum() const override { return 0.0; }

  double kernel(std::span<const double> x, std::span<const double> y) const;
  const ParticleEnsemble& target() const { return target_; }
  const std::vector<double>& rates() const { return rates_; }

 private:
  ParticleEnsemble target_;
  std::vector<double> rates_;
  double target_self_term_;
  SmoothnessProfile profile_;
};

/// E[mu] = phi(m(mu)) with phi(m) = 1/2 m'Am.
class FunctionOfMean final : public EnergyFunctional {
 public:
  explicit FunctionOfMean(Matrix a);

  std::size_t dim() const override { return static_cast<std::size_t>(a_.rows()); }
  std::string name() const override { return "function_of_mean"; }
  double energy(const ParticleEnsemble& mu) const override;
  GradientField grad(const ParticleEnsemble& mu) const override;
  std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const override;
  SmoothnessProfile smoothness() const override { return profile_; }

 private:
  Matrix a_;
  SmoothnessProfile profile_;
};

/// Psi[mu] = int V_eps dmu with V_eps(x) = sum_j r_j sqrt((Ax)_j^2 + eps^2), A orthogonal.
///
/// smoothness() reports the curvature bounds of V_eps: coordinate constants
/// H_i = eps^-1 sum_j r_j A_ji^2 and global H = eps^-1 max_j r_j.
class SmoothedL1Potential final : public PotentialRegularizer {
 public:
  SmoothedL1Potential(std::vector<double> weights, Matrix mixing, double eps);

  std::size_t dim() const override { return weights_.size(); }
  std::string name() const override { return "smoothed_l1"; }
  double energy(const ParticleEnsemble& mu) const override;
  GradientField grad(const ParticleEnsemble& mu) const override;
  std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const override;
  SmoothnessProfile smoothness() const override { return profile_; }

  double potential(std::span<const double> x) const override;
  void potential_gradient(std::span<const double> x, std::span<double> out) const override;
  Matrix potential_hessian(std::span<const double> x) const override;
  std::unique_ptr<CoordinateLine> line(std::span<const double> x, std::size_t i) const override;

  /// eps * sum_j r_j, the value of V_eps at the origin.
  double minimum_value() const;
  const std::vector<double>& weights() const { return weights_; }
  const Matrix& mixing() const { return a_; }
  double eps() const { return eps_; }

 private:
  void rotate(std::span<const double> x, std::span<double> u) const;

  std::vector<double> weights_;
  Matrix a_;
  double eps_;
  SmoothnessProfile profile_;
};

std::shared_ptr<QuadraticPotential> quadratic_potential(Matrix p);
std::shared_ptr<QuadraticInteraction> quadratic_interaction(Matrix q);
std::shared_ptr<MmdEnergy> mmd_energy(ParticleEnsemble target, std::vector<double> rates);
std::shared_ptr<FunctionOfMean> function_of_mean(Matrix a);
std::shared_ptr<SmoothedL1Potential> smoothed_l1_potential(std::vector<double> weights, Matrix mixing,
                                                           double eps);

}  // namespace wcd
