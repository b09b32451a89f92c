#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wcd/functional.hpp"

namespace wcd {

/// Box bounds |alpha| <= A, |beta| <= B, |w|_2 <= W, |b| <= C on the neuron parameters.
struct NnRegion {
  double alpha_bound = 3.0;
  double beta_bound = 3.0;
  double weight_bound = 8.0;
  double bias_bound = 3.0;
};

/// Per-coordinate pieces of the two-layer network smoothness analysis.
struct NnSmoothness {
  double global = 0.0;
  double alpha = 0.0;
  double beta = 1.0;
  double bias = 0.0;
  std::vector<double> weights;

  /// Coordinate constants in particle layout (alpha, beta, w_1..w_d, b).
  SmoothnessProfile profile() const;
};

/// sup over |u| <= bound of 2|tanh u|(1 - tanh^2 u), in closed form.
double tanh_second_derivative_bound(double bound);

/// Smoothness constants of the mean-field two-layer tanh network loss on the
/// region, with the data-distribution integrals replaced by sample means.
NnSmoothness nn_smoothness(const Matrix& data, std::span<const double> targets, const NnRegion& region);

/// Mean-field two-layer network loss E[mu] = 1/(2K) sum_k (g(x_k; mu) - f(x_k))^2,
/// g(x; mu) = (1/N) sum_n alpha_n tanh(w_n . x + b_n) + beta_n.
///
/// Particles are neurons z = (alpha, beta, w_1..w_d, b) of dimension d + 3.
class TwoLayerNnEnergy final : public EnergyFunctional {
 public:
  TwoLayerNnEnergy(Matrix data, std::vector<double> targets, NnRegion region,
                   std::optional<double> known_minimum = std::nullopt);

  std::size_t dim() const override { return input_dim_ + 3; }
  std::string name() const override { return "two_layer_nn"; }
  double energy(const ParticleEnsemble& mu) const override;
  GradientField grad(const ParticleEnsemble& mu) const override;
  std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const override;
  SmoothnessProfile smoothness() const override { return profile_; }
  std::optional<double> known_minimum() const override { return known_minimum_; }

  /// Residuals g(x_k; mu) - f(x_k) for every data point.
  std::vector<double> residuals(const ParticleEnsemble& mu) const;
  bool in_region(std::span<const double> z) const;
  bool in_region(const ParticleEnsemble& mu) const;

  const Matrix& data() const { return data_; }
  const std::vector<double>& targets() const { return targets_; }
  const NnRegion& region() const { return region_; }
  const NnSmoothness& smoothness_detail() const { return detail_; }

 private:
  // Pre-activations s_nk = w_n . x_k + b_n, row-major N x K.
  std::vector<double> preactivations(const ParticleEnsemble& mu) const;

  Matrix data_;
  std::vector<double> targets_;
  NnRegion region_;
  std::size_t input_dim_;
  NnSmoothness detail_;
  SmoothnessProfile profile_;
  std::optional<double> known_minimum_;
};

}  // namespace wcd
