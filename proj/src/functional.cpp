#include "wcd/functional.hpp"

#include <cmath>

#include "wcd/errors.hpp"

namespace wcd {

SmoothnessProfile::SmoothnessProfile(double global_constant, std::vector<double> coord_constants)
    : global(global_constant), coord(std::move(coord_constants)) {}

double SmoothnessProfile::coord_sum() const {
  double total = 0.0;
  for (double l : coord) total += l;
  return total;
}

double SmoothnessProfile::total_coord(std::size_t i) const {
  return coord.at(i) + (reg_coord ? reg_coord->at(i) : 0.0);
}

std::vector<double> SmoothnessProfile::prox_parameters() const {
  std::vector<double> eta(coord.size());
  for (std::size_t i = 0; i < coord.size(); ++i) {
    const double l = coord[i];
    const double h = reg_coord ? (*reg_coord)[i] : 0.0;
    eta[i] = l + std::sqrt(h * h + l * l);
  }
  return eta;
}

double SmoothnessProfile::prox_complexity() const {
  double total = 0.0;
  for (double e : prox_parameters()) total += e;
  return 8.0 * total;
}

void EnergyFunctional::check_ensemble(const ParticleEnsemble& mu) const {
  if (mu.dim() != dim()) {
    throw DimensionError(name() + " expects particles of dimension " + std::to_string(dim()) +
                         ", got " + std::to_string(mu.dim()));
  }
}

void EnergyFunctional::check_coordinate(std::size_t i) const {
  if (i >= dim()) throw IndexError("coordinate " + std::to_string(i) + " out of range for " + name());
}

CompositeFunctional::CompositeFunctional(FunctionalPtr smooth, RegularizerPtr regularizer,
                                         std::optional<double> known_minimum)
    : smooth_(std::move(smooth)), regularizer_(std::move(regularizer)), known_minimum_(known_minimum) {
  if (!smooth_ || !regularizer_) throw ConfigError("composite needs both parts");
  if (smooth_->dim() != regularizer_->dim()) throw DimensionError("composite parts differ in dimension");
  profile_ = smooth_->smoothness();
  const SmoothnessProfile reg = regularizer_->smoothness();
  profile_.reg_global = reg.global;
  profile_.reg_coord = reg.coord;
}

std::string CompositeFunctional::name() const {
  return "composite(" + smooth_->name() + " + " + regularizer_->name() + ")";
}

double CompositeFunctional::energy(const ParticleEnsemble& mu) const {
  return smooth_->energy(mu) + regularizer_->energy(mu);
}

GradientField CompositeFunctional::grad(const ParticleEnsemble& mu) const {
  GradientField g = smooth_->grad(mu);
  const GradientField r = regularizer_->grad(mu);
  for (std::size_t n = 0; n < g.size(); ++n)
    for (std::size_t j = 0; j < g.dim(); ++j) g(n, j) += r(n, j);
  return g;
}

std::vector<double> CompositeFunctional::coord_grad(const ParticleEnsemble& mu, std::size_t i) const {
  std::vector<double> g = smooth_->coord_grad(mu, i);
  const std::vector<double> r = regularizer_->coord_grad(mu, i);
  for (std::size_t n = 0; n < g.size(); ++n) g[n] += r[n];
  return g;
}

std::shared_ptr<CompositeFunctional> composite(FunctionalPtr smooth, RegularizerPtr regularizer,
                                               std::optional<double> known_minimum) {
  return std::make_shared<CompositeFunctional>(std::move(smooth), std::move(regularizer), known_minimum);
}

SumFunctional::SumFunctional(std::vector<FunctionalPtr> terms, std::optional<double> known_minimum)
    : terms_(std::move(terms)), known_minimum_(known_minimum) {
  if (terms_.empty()) throw ConfigError("sum of no functionals");
  const std::size_t d = terms_.front()->dim();
  profile_ = SmoothnessProfile(0.0, std::vector<double>(d, 0.0));
  for (const auto& t : terms_) {
    if (t->dim() != d) throw DimensionError("summed functionals differ in dimension");
    const SmoothnessProfile p = t->smoothness();
    profile_.global += p.global;
    for (std::size_t i = 0; i < d; ++i) profile_.coord[i] += p.coord[i];
  }
}

std::string SumFunctional::name() const {
  std::string out;
  for (const auto& t : terms_) out += (out.empty() ? "" : " + ") + t->name();
  return out;
}

double SumFunctional::energy(const ParticleEnsemble& mu) const {
  double total = 0.0;
  for (const auto& t : terms_) total += t->energy(mu);
  return total;
}

GradientField SumFunctional::grad(const ParticleEnsemble& mu) const {
  GradientField g = terms_.front()->grad(mu);
  for (std::size_t k = 1; k < terms_.size(); ++k) {
    const GradientField r = terms_[k]->grad(mu);
    for (std::size_t n = 0; n < g.size(); ++n)
      for (std::size_t j = 0; j < g.dim(); ++j) g(n, j) += r(n, j);
  }
  return g;
}

std::vector<double> SumFunctional::coord_grad(const ParticleEnsemble& mu, std::size_t i) const {
  std::vector<double> g = terms_.front()->coord_grad(mu, i);
  for (std::size_t k = 1; k < terms_.size(); ++k) {
    const std::vector<double> r = terms_[k]->coord_grad(mu, i);
    for (std::size_t n = 0; n < g.size(); ++n) g[n] += r[n];
  }
  return g;
}

}  // namespace wcd
