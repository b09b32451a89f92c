#include "wcd/nn.hpp"

#include <cmath>

#include "wcd/errors.hpp"

namespace wcd {

namespace {

// Grid used for the suprema over |u| <= S(x) that have no closed form.
constexpr int kSupGridPoints = 4096;

constexpr std::size_t kAlpha = 0;
constexpr std::size_t kBeta = 1;
constexpr std::size_t kFirstWeight = 2;

}  // namespace

SmoothnessProfile NnSmoothness::profile() const {
  std::vector<double> coord;
  coord.reserve(weights.size() + 3);
  coord.push_back(alpha);
  coord.push_back(beta);
  coord.insert(coord.end(), weights.begin(), weights.end());
  coord.push_back(bias);
  return SmoothnessProfile(global, std::move(coord));
}

double tanh_second_derivative_bound(double bound) {
  // g(t) = 2t(1 - t^2) on t = tanh|u| in [0, tanh(bound)] peaks at t = 1/sqrt(3).
  const double t = std::tanh(std::abs(bound));
  if (t >= 1.0 / std::sqrt(3.0)) return 4.0 / (3.0 * std::sqrt(3.0));
  return 2.0 * t * (1.0 - t * t);
}

NnSmoothness nn_smoothness(const Matrix& data, std::span<const double> targets, const NnRegion& region) {
  const auto k_count = data.rows();
  const auto d = data.cols();
  if (k_count == 0) throw ConfigError("network loss needs at least one data point");
  if (static_cast<std::size_t>(k_count) != targets.size()) throw DimensionError("one target per data point");
  const double a = region.alpha_bound;
  const double b = region.beta_bound;
  if (!(a > 0.0) || !(b > 0.0) || !(region.weight_bound > 0.0) || !(region.bias_bound > 0.0)) {
    throw ConfigError("network region bounds must be positive");
  }

  NnSmoothness out;
  out.weights.assign(static_cast<std::size_t>(d), 0.0);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    const double norm = data.row(k).norm();
    const double kx = std::sqrt(1.0 + norm * norm);
    const double sx = region.weight_bound * norm + region.bias_bound;
    const double m0 = std::tanh(sx);
    const double m1 = 1.0;
    const double m2 = tanh_second_derivative_bound(sx);
    const double rx = a * m0 + b + std::abs(targets[static_cast<std::size_t>(k)]);

    double sup0 = 0.0;
    double sup1 = 0.0;
    for (int g = 0; g <= kSupGridPoints; ++g) {
      const double u = sx * static_cast<double>(g) / kSupGridPoints;
      const double t = std::tanh(u);
      const double d1 = 1.0 - t * t;
      const double d2 = -2.0 * t * d1;
      sup0 = std::max(sup0, std::sqrt(1.0 + t * t + a * a * d1 * d1 * kx * kx));
      sup1 = std::max(sup1, a * std::abs(d2) * kx + std::sqrt(a * a * d2 * d2 * kx * kx + 4.0 * d1 * d1));
    }
    const double big_m0 = sup0;
    const double big_m1 = 0.5 * kx * sup1;

    out.global += big_m0 * big_m0 + rx * big_m1;
    out.alpha += m0 * m0;
    const double curvature = a * a * m1 * m1 + a * rx * m2;
    out.bias += curvature;
    for (Eigen::Index j = 0; j < d; ++j) out.weights[static_cast<std::size_t>(j)] += data(k, j) * data(k, j) * curvature;
  }
  const double inv_k = 1.0 / static_cast<double>(k_count);
  out.global *= inv_k;
  out.alpha *= inv_k;
  out.bias *= inv_k;
  for (double& w : out.weights) w *= inv_k;
  out.beta = 1.0;
  return out;
}

TwoLayerNnEnergy::TwoLayerNnEnergy(Matrix data, std::vector<double> targets, NnRegion region,
                                   std::optional<double> known_minimum)
    : data_(std::move(data)),
      targets_(std::move(targets)),
      region_(region),
      input_dim_(static_cast<std::size_t>(data_.cols())),
      known_minimum_(known_minimum) {
  if (data_.rows() == 0) throw ConfigError("network loss needs at least one data point");
  if (input_dim_ == 0) throw DimensionError("network inputs need d >= 1");
  detail_ = nn_smoothness(data_, targets_, region_);
  profile_ = detail_.profile();
}

std::vector<double> TwoLayerNnEnergy::preactivations(const ParticleEnsemble& mu) const {
  const std::size_t n_count = mu.size();
  const auto k_count = static_cast<std::size_t>(data_.rows());
  const std::size_t d = input_dim_;
  std::vector<double> s(n_count * k_count);
  for (std::size_t n = 0; n < n_count; ++n) {
    auto z = mu.row(n);
    const double bias = z[kFirstWeight + d];
    for (std::size_t k = 0; k < k_count; ++k) {
      double total = bias;
      for (std::size_t j = 0; j < d; ++j)
        total += z[kFirstWeight + j] * data_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
      s[n * k_count + k] = total;
    }
  }
  return s;
}

std::vector<double> TwoLayerNnEnergy::residuals(const ParticleEnsemble& mu) const {
  check_ensemble(mu);
  const auto s = preactivations(mu);
  const std::size_t n_count = mu.size();
  const auto k_count = static_cast<std::size_t>(data_.rows());
  std::vector<double> r(k_count, 0.0);
  for (std::size_t n = 0; n < n_count; ++n) {
    const double alpha = mu(n, kAlpha);
    const double beta = mu(n, kBeta);
    for (std::size_t k = 0; k < k_count; ++k) r[k] += alpha * std::tanh(s[n * k_count + k]) + beta;
  }
  for (std::size_t k = 0; k < k_count; ++k) r[k] = r[k] / static_cast<double>(n_count) - targets_[k];
  return r;
}

double TwoLayerNnEnergy::energy(const ParticleEnsemble& mu) const {
  const auto r = residuals(mu);
  double total = 0.0;
  for (double v : r) total += v * v;
  return 0.5 * total / static_cast<double>(r.size());
}

GradientField TwoLayerNnEnergy::grad(const ParticleEnsemble& mu) const {
  const auto r = residuals(mu);
  const auto s = preactivations(mu);
  const std::size_t n_count = mu.size();
  const std::size_t k_count = r.size();
  const std::size_t d = input_dim_;
  const double inv_k = 1.0 / static_cast<double>(k_count);
  GradientField g(n_count, dim());
  for (std::size_t n = 0; n < n_count; ++n) {
    const double alpha = mu(n, kAlpha);
    auto out = g.row(n);
    for (std::size_t k = 0; k < k_count; ++k) {
      const double t = std::tanh(s[n * k_count + k]);
      const double coef = r[k] * alpha * (1.0 - t * t);
      out[kAlpha] += r[k] * t;
      out[kBeta] += r[k];
      for (std::size_t j = 0; j < d; ++j)
        out[kFirstWeight + j] += coef * data_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
      out[kFirstWeight + d] += coef;
    }
    for (double& v : out) v *= inv_k;
  }
  return g;
}

std::vector<double> TwoLayerNnEnergy::coord_grad(const ParticleEnsemble& mu, std::size_t i) const {
  check_coordinate(i);
  const auto r = residuals(mu);
  const std::size_t n_count = mu.size();
  const std::size_t k_count = r.size();
  const double inv_k = 1.0 / static_cast<double>(k_count);
  std::vector<double> g(n_count, 0.0);
  if (i == kBeta) {
    double total = 0.0;
    for (double v : r) total += v;
    std::fill(g.begin(), g.end(), total * inv_k);
    return g;
  }
  const auto s = preactivations(mu);
  const std::size_t d = input_dim_;
  for (std::size_t n = 0; n < n_count; ++n) {
    const double alpha = mu(n, kAlpha);
    double total = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      const double t = std::tanh(s[n * k_count + k]);
      if (i == kAlpha) {
        total += r[k] * t;
        continue;
      }
      const double coef = r[k] * alpha * (1.0 - t * t);
      if (i == kFirstWeight + d) {
        total += coef;
      } else {
        total += coef * data_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i - kFirstWeight));
      }
    }
    g[n] = total * inv_k;
  }
  return g;
}

bool TwoLayerNnEnergy::in_region(std::span<const double> z) const {
  if (z.size() != dim()) return false;
  double w_sq = 0.0;
  for (std::size_t j = 0; j < input_dim_; ++j) w_sq += z[kFirstWeight + j] * z[kFirstWeight + j];
  return std::abs(z[kAlpha]) <= region_.alpha_bound && std::abs(z[kBeta]) <= region_.beta_bound &&
         std::sqrt(w_sq) <= region_.weight_bound && std::abs(z[kFirstWeight + input_dim_]) <= region_.bias_bound;
}

bool TwoLayerNnEnergy::in_region(const ParticleEnsemble& mu) const {
  for (std::size_t n = 0; n < mu.size(); ++n) {
    if (!in_region(mu.row(n))) return false;
  }
  return true;
}

}  // namespace wcd
