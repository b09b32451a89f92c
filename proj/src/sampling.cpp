#include "wcd/sampling.hpp"

#include <cmath>
#include <string>

#include "wcd/errors.hpp"

namespace wcd {

namespace {

double broadcast(const std::vector<double>& v, std::size_t j, double fallback) {
  if (v.empty()) return fallback;
  return v.size() == 1 ? v[0] : v[j];
}

void check_length(const std::vector<double>& v, std::size_t d, const char* what) {
  if (!v.empty() && v.size() != 1 && v.size() != d) {
    throw ConfigError(std::string(what) + " has length " + std::to_string(v.size()) +
                      ", expected 1 or " + std::to_string(d));
  }
}

struct Sampler {
  std::size_t n;
  std::size_t d;
  Rng& rng;

  std::vector<double> operator()(const IsotropicGaussian& g) const {
    if (!(g.sigma > 0.0)) throw ConfigError("Gaussian sigma must be positive");
    check_length(g.mean, d, "Gaussian mean");
    std::vector<double> out(n * d);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < d; ++j) out[k * d + j] = broadcast(g.mean, j, 0.0) + g.sigma * rng.normal();
    return out;
  }

  std::vector<double> operator()(const UniformBox& box) const {
    check_length(box.lo, d, "box lower bound");
    check_length(box.hi, d, "box upper bound");
    if (box.lo.empty() || box.hi.empty()) throw ConfigError("box bounds missing");
    for (std::size_t j = 0; j < d; ++j) {
      if (!(broadcast(box.hi, j, 0.0) > broadcast(box.lo, j, 0.0))) {
        throw ConfigError("box upper bound must exceed lower bound");
      }
    }
    std::vector<double> out(n * d);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < d; ++j)
        out[k * d + j] = rng.uniform(broadcast(box.lo, j, 0.0), broadcast(box.hi, j, 0.0));
    return out;
  }

  std::vector<double> operator()(const UniformBall& ball) const {
    if (!(ball.radius > 0.0)) throw ConfigError("ball radius must be positive");
    std::vector<double> out(n * d);
    for (std::size_t k = 0; k < n; ++k) {
      double norm_sq = 0.0;
      do {
        norm_sq = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
          out[k * d + j] = rng.normal();
          norm_sq += out[k * d + j] * out[k * d + j];
        }
      } while (norm_sq == 0.0);
      const double r = ball.radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
      const double scale = r / std::sqrt(norm_sq);
      for (std::size_t j = 0; j < d; ++j) out[k * d + j] *= scale;
    }
    return out;
  }

  std::vector<double> operator()(const TruncatedGaussian& tg) const {
    if (tg.variances.size() != d) throw ConfigError("truncated Gaussian needs d variances");
    if (truncated_gaussian_acceptance(tg) < 1e-6) {
      throw ConfigError("truncated Gaussian acceptance probability below 1e-6");
    }
    std::vector<double> sd(d);
    for (std::size_t j = 0; j < d; ++j) sd[j] = std::sqrt(tg.variances[j]);
    std::vector<double> out(n * d);
    for (std::size_t k = 0; k < n; ++k) {
      bool accepted = false;
      for (std::uint64_t attempt = 0; attempt < kMaxProposalsPerSample && !accepted; ++attempt) {
        accepted = true;
        for (std::size_t j = 0; j < d; ++j) {
          const double x = sd[j] * rng.normal();
          out[k * d + j] = x;
          if (std::abs(x) > tg.bound) accepted = false;
        }
      }
      if (!accepted) throw ConfigError("truncated Gaussian rejection sampler hit the proposal cap");
    }
    return out;
  }
};

}  // namespace

double truncated_gaussian_acceptance(const TruncatedGaussian& spec) {
  if (!(spec.bound > 0.0)) throw ConfigError("truncation bound must be positive");
  double p = 1.0;
  for (double v : spec.variances) {
    if (!(v > 0.0)) throw ConfigError("truncated Gaussian variances must be positive");
    p *= std::erf(spec.bound / std::sqrt(2.0 * v));
  }
  return p;
}

ParticleEnsemble sample_ensemble(const DistributionSpec& spec, std::size_t n, std::size_t d,
                                 Rng& rng) {
  if (n == 0 || d == 0) throw ConfigError("sample_ensemble needs N >= 1 and d >= 1");
  return ParticleEnsemble(n, d, std::visit(Sampler{n, d, rng}, spec));
}

ParticleEnsemble sample_ensemble(const DistributionSpec& spec, std::size_t n, std::size_t d,
                                 std::uint64_t seed) {
  Rng rng(seed);
  return sample_ensemble(spec, n, d, rng);
}

ParticleEnsemble hstack(const std::vector<ParticleEnsemble>& blocks) {
  if (blocks.empty()) throw DimensionError("hstack of no blocks");
  const std::size_t n = blocks.front().size();
  std::size_t d = 0;
  for (const auto& b : blocks) {
    if (b.size() != n) throw DimensionError("hstack blocks differ in particle count");
    d += b.dim();
  }
  std::vector<double> out(n * d);
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t offset = 0;
    for (const auto& b : blocks) {
      auto row = b.row(k);
      for (std::size_t j = 0; j < row.size(); ++j) out[k * d + offset + j] = row[j];
      offset += b.dim();
    }
  }
  return ParticleEnsemble(n, d, std::move(out));
}

}  // namespace wcd
