#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace wcd {

/// N x d array of per-particle vectors stored row-major.
///
/// Tag distinguishes gradient fields from displacement fields so the two
/// cannot be mixed up in pushforward calls.
template <class Tag>
class Field {
 public:
  Field() = default;
  Field(std::size_t n, std::size_t d) : n_(n), d_(d), values_(n * d, 0.0) {}
  Field(std::size_t n, std::size_t d, std::vector<double> values);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  double operator()(std::size_t n, std::size_t j) const { return values_[n * d_ + j]; }
  double& operator()(std::size_t n, std::size_t j) { return values_[n * d_ + j]; }

  std::span<const double> row(std::size_t n) const { return {values_.data() + n * d_, d_}; }
  std::span<double> row(std::size_t n) { return {values_.data() + n * d_, d_}; }
  std::span<const double> values() const { return values_; }

  std::vector<double> column(std::size_t j) const;

  /// Copy with every column other than `i` set to zero (U_i applied row-wise).
  Field restricted_to(std::size_t i) const;

  Field operator-() const;

 private:
  std::size_t n_ = 0;
  std::size_t d_ = 0;
  std::vector<double> values_;
};

struct GradientTag {};
struct DisplacementTag {};

/// Wasserstein gradient evaluated at each particle.
using GradientField = Field<GradientTag>;
/// Transport displacement T(x_n) for each particle.
using DisplacementField = Field<DisplacementTag>;

/// Uniform empirical measure (1/N) sum_n delta_{x_n}.
///
/// Immutable after construction; all coordinates are finite.
class ParticleEnsemble {
 public:
  ParticleEnsemble(std::size_t n, std::size_t d, std::vector<double> points);

  std::size_t size() const { return n_; }
  std::size_t dim() const { return d_; }

  double operator()(std::size_t n, std::size_t j) const { return points_[n * d_ + j]; }
  std::span<const double> row(std::size_t n) const { return {points_.data() + n * d_, d_}; }
  std::span<const double> points() const { return points_; }
  std::vector<double> column(std::size_t j) const;

  bool operator==(const ParticleEnsemble&) const = default;

 private:
  std::size_t n_;
  std::size_t d_;
  std::vector<double> points_;
};

/// Moves particle n by T.values[n].
ParticleEnsemble pushforward(const ParticleEnsemble& mu, const DisplacementField& displacement);

/// Moves particle n by s[n] along coordinate i. Columns j != i are copied untouched.
ParticleEnsemble coordinate_pushforward(const ParticleEnsemble& mu, std::size_t i,
                                        std::span<const double> shift);

/// (1/N) sum_n |f(x_n)|^2.
template <class Tag>
double mu_norm_sq(const Field<Tag>& field);

/// (1/N) sum_n f(x_n) . g(x_n).
template <class TagA, class TagB>
double mu_inner(const Field<TagA>& a, const Field<TagB>& b);

std::vector<double> barycenter(const ParticleEnsemble& mu);

/// Displacement field carrying the given per-particle shifts on coordinate i only.
DisplacementField coordinate_displacement(std::size_t n, std::size_t d, std::size_t i,
                                          std::span<const double> shift);

}  // namespace wcd
