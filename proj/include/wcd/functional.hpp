#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wcd/ensemble.hpp"
#include "wcd/linalg.hpp"

namespace wcd {

/// Global and per-coordinate smoothness constants of an energy.
///
/// For composite energies G + Psi, `coord` holds the L_i of G and `reg_coord`
/// the H_i of Psi.
struct SmoothnessProfile {
  double global = 0.0;
  std::vector<double> coord;
  std::optional<double> reg_global;
  std::optional<std::vector<double>> reg_coord;

  SmoothnessProfile() = default;
  SmoothnessProfile(double global_constant, std::vector<double> coord_constants);

  std::size_t dim() const { return coord.size(); }
  /// sum_i L_i accumulated in index order.
  double coord_sum() const;
  /// L_i + H_i, the coordinate constant of the whole energy.
  double total_coord(std::size_t i) const;
  /// eta_i = L_i + sqrt(H_i^2 + L_i^2), with H_i = 0 when there is no regularizer.
  std::vector<double> prox_parameters() const;
  /// 8 * sum_i eta_i.
  double prox_complexity() const;
};

/// Energy E[mu] over uniform empirical measures with its Wasserstein gradient.
///
/// Implementations are immutable and thread-safe. coord_grad(mu, i)[n] must
/// agree with grad(mu)(n, i) to 1e-12.
class EnergyFunctional {
 public:
  virtual ~EnergyFunctional() = default;

  virtual std::size_t dim() const = 0;
  virtual std::string name() const = 0;
  virtual double energy(const ParticleEnsemble& mu) const = 0;
  virtual GradientField grad(const ParticleEnsemble& mu) const = 0;
  virtual std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const = 0;
  virtual SmoothnessProfile smoothness() const = 0;
  virtual std::optional<double> known_minimum() const { return std::nullopt; }

 protected:
  void check_ensemble(const ParticleEnsemble& mu) const;
  void check_coordinate(std::size_t i) const;
};

using FunctionalPtr = std::shared_ptr<const EnergyFunctional>;

/// Values of a scalar potential restricted to the line x + s e_i.
struct LinePoint {
  double value;
  double slope;
  double curvature;
};

class CoordinateLine {
 public:
  virtual ~CoordinateLine() = default;
  virtual LinePoint at(double s) const = 0;
};

/// Potential energy Psi[mu] = int V dmu with pointwise access to V, used as
/// the proximal part of a composite problem.
class PotentialRegularizer : public EnergyFunctional {
 public:
  virtual double potential(std::span<const double> x) const = 0;
  virtual void potential_gradient(std::span<const double> x, std::span<double> out) const = 0;
  virtual Matrix potential_hessian(std::span<const double> x) const = 0;
  virtual std::unique_ptr<CoordinateLine> line(std::span<const double> x, std::size_t i) const = 0;
};

using RegularizerPtr = std::shared_ptr<const PotentialRegularizer>;

/// E = G + Psi with G handled by gradients and Psi proximally.
class CompositeFunctional final : public EnergyFunctional {
 public:
  CompositeFunctional(FunctionalPtr smooth, RegularizerPtr regularizer,
                      std::optional<double> known_minimum = std::nullopt);

  std::size_t dim() const override { return smooth_->dim(); }
  std::string name() const override;
  double energy(const ParticleEnsemble& mu) const override;
  GradientField grad(const ParticleEnsemble& mu) const override;
  std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const override;
  SmoothnessProfile smoothness() const override { return profile_; }
  std::optional<double> known_minimum() const override { return known_minimum_; }

  const EnergyFunctional& smooth_part() const { return *smooth_; }
  const PotentialRegularizer& regularizer() const { return *regularizer_; }

 private:
  FunctionalPtr smooth_;
  RegularizerPtr regularizer_;
  SmoothnessProfile profile_;
  std::optional<double> known_minimum_;
};

std::shared_ptr<CompositeFunctional> composite(FunctionalPtr smooth, RegularizerPtr regularizer,
                                               std::optional<double> known_minimum = std::nullopt);

/// Plain sum of energies; smoothness constants add.
class SumFunctional final : public EnergyFunctional {
 public:
  explicit SumFunctional(std::vector<FunctionalPtr> terms,
                         std::optional<double> known_minimum = std::nullopt);

  std::size_t dim() const override { return terms_.front()->dim(); }
  std::string name() const override;
  double energy(const ParticleEnsemble& mu) const override;
  GradientField grad(const ParticleEnsemble& mu) const override;
  std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const override;
  SmoothnessProfile smoothness() const override { return profile_; }
  std::optional<double> known_minimum() const override { return known_minimum_; }

  const std::vector<FunctionalPtr>& terms() const { return terms_; }

 private:
  std::vector<FunctionalPtr> terms_;
  SmoothnessProfile profile_;
  std::optional<double> known_minimum_;
};

}  // namespace wcd
