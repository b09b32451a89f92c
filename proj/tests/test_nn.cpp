#include <cmath>

#include "doctest.h"
#include "wcd/errors.hpp"
#include "wcd/harness.hpp"
#include "wcd/nn.hpp"
#include "wcd/sampling.hpp"
#include "wcd/verify.hpp"

using namespace wcd;

namespace {

struct SmallNet {
  Matrix data;
  std::vector<double> targets;
};

SmallNet small_net(std::size_t k, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  SmallNet s{Matrix(k, d), std::vector<double>(k)};
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t j = 0; j < d; ++j) s.data(a, j) = rng.normal();
    s.targets[a] = std::tanh(s.data(a, 0) - 0.3) + 0.1;
  }
  return s;
}

}  // namespace

TEST_CASE("planted neuron is an exact minimizer") {
  const std::size_t d = 4;
  std::vector<double> w{0.5, -0.5, 0.5, 0.5};
  auto data = sample_ensemble(IsotropicGaussian{{}, 1.0}, 30, d, 3);
  Matrix x(30, d);
  std::vector<double> f(30);
  for (std::size_t k = 0; k < 30; ++k) {
    double s = 0.2;
    for (std::size_t j = 0; j < d; ++j) {
      x(k, j) = data(k, j);
      s += w[j] * data(k, j);
    }
    f[k] = std::tanh(s) + 0.1;
  }
  TwoLayerNnEnergy e(x, f, NnRegion{}, 0.0);
  ParticleEnsemble planted(1, d + 3, {1.0, 0.1, w[0], w[1], w[2], w[3], 0.2});
  CHECK(e.energy(planted) <= 1e-30);
  CHECK(mu_norm_sq(e.grad(planted)) <= 1e-30);
}

TEST_CASE("beta component equals the mean residual for every particle") {
  const auto net = small_net(5, 2, 1);
  TwoLayerNnEnergy e(net.data, net.targets, NnRegion{});
  const auto mu = sample_ensemble(IsotropicGaussian{{}, 0.5}, 4, 5, 2);
  const auto r = e.residuals(mu);
  double mean = 0.0;
  for (double v : r) mean += v;
  mean /= 5.0;
  const auto g = e.grad(mu);
  for (std::size_t n = 0; n < 4; ++n) CHECK(g(n, 1) == doctest::Approx(mean).epsilon(1e-14));
}

TEST_CASE("residuals match a direct evaluation of the network") {
  const auto net = small_net(6, 3, 4);
  TwoLayerNnEnergy e(net.data, net.targets, NnRegion{});
  const auto mu = sample_ensemble(IsotropicGaussian{{}, 0.7}, 5, 6, 5);
  const auto r = e.residuals(mu);
  double energy = 0.0;
  for (std::size_t k = 0; k < 6; ++k) {
    double g = 0.0;
    for (std::size_t n = 0; n < 5; ++n) {
      double s = mu(n, 5);
      for (std::size_t j = 0; j < 3; ++j) s += mu(n, 2 + j) * net.data(k, j);
      g += mu(n, 0) * std::tanh(s) + mu(n, 1);
    }
    g /= 5.0;
    CHECK(r[k] == doctest::Approx(g - net.targets[k]).epsilon(1e-13));
    energy += (g - net.targets[k]) * (g - net.targets[k]);
  }
  CHECK(e.energy(mu) == doctest::Approx(energy / 12.0).epsilon(1e-13));
}

TEST_CASE("network gradient passes the finite-difference oracle") {
  const auto net = small_net(5, 2, 7);
  TwoLayerNnEnergy e(net.data, net.targets, NnRegion{});
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto mu = sample_ensemble(IsotropicGaussian{{}, 0.8}, 3, 5, 10 + s);
    CHECK(fd_gradient_check(e, mu).max_error < 1e-5);
  }
}

TEST_CASE("shape errors") {
  const auto net = small_net(5, 2, 7);
  TwoLayerNnEnergy e(net.data, net.targets, NnRegion{});
  CHECK_THROWS_AS(e.energy(ParticleEnsemble(1, 4, {0, 0, 0, 0})), DimensionError);
  CHECK_THROWS_AS(TwoLayerNnEnergy(Matrix(0, 2), {}, NnRegion{}), ConfigError);
}

TEST_CASE("tanh second-derivative bound against a calculus oracle") {
  // Maximize g(t) = 2t(1 - t^2) over t in [0, tanh S] on a fine grid.
  for (double s : {0.05, 0.3, 0.6, 0.65, 0.7, 1.0, 3.0, 20.0}) {
    const double top = std::tanh(s);
    double best = 0.0;
    for (int k = 0; k <= 200000; ++k) {
      const double t = top * k / 200000.0;
      best = std::max(best, 2.0 * t * (1.0 - t * t));
    }
    CHECK(tanh_second_derivative_bound(s) == doctest::Approx(best).epsilon(1e-9));
  }
  CHECK(tanh_second_derivative_bound(5.0) == doctest::Approx(4.0 / (3.0 * std::sqrt(3.0))).epsilon(1e-15));
}

TEST_CASE("coordinate constants follow the sample-average formulas") {
  const auto net = small_net(40, 3, 11);
  const NnRegion reg{2.0, 1.5, 4.0, 1.0};
  const NnSmoothness s = nn_smoothness(net.data, net.targets, reg);
  double la = 0.0, lb = 0.0;
  std::vector<double> lw(3, 0.0);
  for (std::size_t k = 0; k < 40; ++k) {
    const double norm = net.data.row(k).norm();
    const double big_s = reg.weight_bound * norm + reg.bias_bound;
    const double m0 = std::tanh(big_s);
    const double r = reg.alpha_bound * m0 + reg.beta_bound + std::abs(net.targets[k]);
    const double curv = reg.alpha_bound * reg.alpha_bound + reg.alpha_bound * r * tanh_second_derivative_bound(big_s);
    la += m0 * m0;
    lb += curv;
    for (std::size_t j = 0; j < 3; ++j) lw[j] += net.data(k, j) * net.data(k, j) * curv;
  }
  CHECK(s.beta == 1.0);
  CHECK(s.alpha == doctest::Approx(la / 40.0).epsilon(1e-13));
  CHECK(s.bias == doctest::Approx(lb / 40.0).epsilon(1e-13));
  for (std::size_t j = 0; j < 3; ++j) CHECK(s.weights[j] == doctest::Approx(lw[j] / 40.0).epsilon(1e-13));
  const auto p = s.profile();
  REQUIRE(p.coord.size() == 6);
  CHECK(p.coord[0] == s.alpha);
  CHECK(p.coord[1] == 1.0);
  CHECK(p.coord[2] == s.weights[0]);
  CHECK(p.coord[5] == s.bias);
}

TEST_CASE("paper-scale global constant is near the reported value") {
  ExperimentSpec spec = default_spec("example5");
  spec.particles = 1;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    spec.seed = seed;
    const Problem p = build_example5(spec);
    const double l = p.functional->smoothness().global;
    CAPTURE(l);
    CHECK(std::abs(l - 125.033) <= 0.1 * 125.033);
    CHECK(p.functional->smoothness().coord[1] == 1.0);
  }
}

TEST_CASE("region membership") {
  const auto net = small_net(5, 2, 7);
  TwoLayerNnEnergy e(net.data, net.targets, NnRegion{3, 3, 8, 3});
  CHECK(e.in_region(std::vector<double>{2.9, -2.9, 5.0, 6.0, 2.9}));
  CHECK_FALSE(e.in_region(std::vector<double>{3.1, 0, 0, 0, 0}));
  CHECK_FALSE(e.in_region(std::vector<double>{0, 0, 6.0, 6.0, 0}));
  CHECK_FALSE(e.in_region(std::vector<double>{0, 0, 0, 0, -3.5}));
}
