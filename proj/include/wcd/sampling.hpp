#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "wcd/ensemble.hpp"
#include "wcd/rng.hpp"

namespace wcd {

/// N(mean, sigma^2 I). An empty mean means the origin.
struct IsotropicGaussian {
  std::vector<double> mean;
  double sigma = 1.0;
};

/// Independent Unif[lo_j, hi_j] per coordinate; a single entry broadcasts.
struct UniformBox {
  std::vector<double> lo;
  std::vector<double> hi;
};

/// Uniform on the Euclidean ball of the given radius centred at the origin.
struct UniformBall {
  double radius = 1.0;
};

/// N(0, diag(variances)) conditioned on |x|_inf <= bound, drawn by rejection.
struct TruncatedGaussian {
  std::vector<double> variances;
  double bound = 3.0;
};

using DistributionSpec = std::variant<IsotropicGaussian, UniformBox, UniformBall, TruncatedGaussian>;

inline constexpr std::uint64_t kMaxProposalsPerSample = 1'000'000;

ParticleEnsemble sample_ensemble(const DistributionSpec& spec, std::size_t n, std::size_t d,
                                 std::uint64_t seed);
ParticleEnsemble sample_ensemble(const DistributionSpec& spec, std::size_t n, std::size_t d,
                                 Rng& rng);

/// Acceptance probability of the truncated Gaussian rejection sampler.
double truncated_gaussian_acceptance(const TruncatedGaussian& spec);

/// Concatenates ensembles with equal particle count along the coordinate axis.
ParticleEnsemble hstack(const std::vector<ParticleEnsemble>& blocks);

}  // namespace wcd
