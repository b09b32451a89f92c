#include "wcd/ensemble.hpp"

#include <cmath>
#include <string>

#include "wcd/errors.hpp"

namespace wcd {

namespace {

void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DimensionError(std::string(what) + " contains a non-finite entry");
  }
}

}  // namespace

template <class Tag>
Field<Tag>::Field(std::size_t n, std::size_t d, std::vector<double> values)
    : n_(n), d_(d), values_(std::move(values)) {
  if (values_.size() != n_ * d_) {
    throw DimensionError("field storage holds " + std::to_string(values_.size()) +
                         " values, expected " + std::to_string(n_ * d_));
  }
}

template <class Tag>
std::vector<double> Field<Tag>::column(std::size_t j) const {
  if (j >= d_) throw IndexError("column " + std::to_string(j) + " out of range");
  std::vector<double> out(n_);
  for (std::size_t n = 0; n < n_; ++n) out[n] = values_[n * d_ + j];
  return out;
}

template <class Tag>
Field<Tag> Field<Tag>::restricted_to(std::size_t i) const {
  if (i >= d_) throw IndexError("coordinate " + std::to_string(i) + " out of range");
  Field out(n_, d_);
  for (std::size_t n = 0; n < n_; ++n) out(n, i) = (*this)(n, i);
  return out;
}

template <class Tag>
Field<Tag> Field<Tag>::operator-() const {
  Field out = *this;
  for (double& v : out.values_) v = -v;
  return out;
}

template class Field<GradientTag>;
template class Field<DisplacementTag>;

ParticleEnsemble::ParticleEnsemble(std::size_t n, std::size_t d, std::vector<double> points)
    : n_(n), d_(d), points_(std::move(points)) {
  if (n_ == 0 || d_ == 0) throw DimensionError("ensemble needs N >= 1 and d >= 1");
  if (points_.size() != n_ * d_) {
    throw DimensionError("ensemble storage holds " + std::to_string(points_.size()) +
                         " values, expected " + std::to_string(n_ * d_));
  }
  require_finite(points_, "ensemble");
}

std::vector<double> ParticleEnsemble::column(std::size_t j) const {
  if (j >= d_) throw IndexError("column " + std::to_string(j) + " out of range");
  std::vector<double> out(n_);
  for (std::size_t n = 0; n < n_; ++n) out[n] = points_[n * d_ + j];
  return out;
}

ParticleEnsemble pushforward(const ParticleEnsemble& mu, const DisplacementField& displacement) {
  if (displacement.size() != mu.size() || displacement.dim() != mu.dim()) {
    throw DimensionError("displacement field shape does not match ensemble");
  }
  std::vector<double> out(mu.points().begin(), mu.points().end());
  auto t = displacement.values();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += t[k];
  return ParticleEnsemble(mu.size(), mu.dim(), std::move(out));
}

ParticleEnsemble coordinate_pushforward(const ParticleEnsemble& mu, std::size_t i,
                                        std::span<const double> shift) {
  if (i >= mu.dim()) throw IndexError("coordinate " + std::to_string(i) + " out of range");
  if (shift.size() != mu.size()) throw DimensionError("shift length must equal particle count");
  std::vector<double> out(mu.points().begin(), mu.points().end());
  const std::size_t d = mu.dim();
  for (std::size_t n = 0; n < mu.size(); ++n) out[n * d + i] += shift[n];
  return ParticleEnsemble(mu.size(), d, std::move(out));
}

template <class Tag>
double mu_norm_sq(const Field<Tag>& field) {
  if (field.size() == 0) throw DimensionError("empty field");
  double total = 0.0;
  for (double v : field.values()) total += v * v;
  return total / static_cast<double>(field.size());
}

template double mu_norm_sq(const GradientField&);
template double mu_norm_sq(const DisplacementField&);

template <class TagA, class TagB>
double mu_inner(const Field<TagA>& a, const Field<TagB>& b) {
  if (a.size() != b.size() || a.dim() != b.dim()) throw DimensionError("field shapes differ");
  if (a.size() == 0) throw DimensionError("empty field");
  auto av = a.values();
  auto bv = b.values();
  double total = 0.0;
  for (std::size_t k = 0; k < av.size(); ++k) total += av[k] * bv[k];
  return total / static_cast<double>(a.size());
}

template double mu_inner(const GradientField&, const DisplacementField&);
template double mu_inner(const GradientField&, const GradientField&);
template double mu_inner(const DisplacementField&, const DisplacementField&);

std::vector<double> barycenter(const ParticleEnsemble& mu) {
  const std::size_t d = mu.dim();
  std::vector<double> mean(d, 0.0);
  for (std::size_t n = 0; n < mu.size(); ++n) {
    auto x = mu.row(n);
    for (std::size_t j = 0; j < d; ++j) mean[j] += x[j];
  }
  for (double& m : mean) m /= static_cast<double>(mu.size());
  return mean;
}

DisplacementField coordinate_displacement(std::size_t n, std::size_t d, std::size_t i,
                                          std::span<const double> shift) {
  if (i >= d) throw IndexError("coordinate " + std::to_string(i) + " out of range");
  if (shift.size() != n) throw DimensionError("shift length must equal particle count");
  DisplacementField out(n, d);
  for (std::size_t k = 0; k < n; ++k) out(k, i) = shift[k];
  return out;
}

}  // namespace wcd
