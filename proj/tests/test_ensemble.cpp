#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "wcd/ensemble.hpp"
#include "wcd/errors.hpp"
#include "wcd/sampling.hpp"

using namespace wcd;

namespace {

ParticleEnsemble random_ensemble(std::size_t n, std::size_t d, std::uint64_t seed) {
  return sample_ensemble(IsotropicGaussian{{}, 1.0}, n, d, seed);
}

}  // namespace

TEST_CASE("ensemble rejects empty shapes and non-finite points") {
  CHECK_THROWS_AS(ParticleEnsemble(0, 2, {}), DimensionError);
  CHECK_THROWS_AS(ParticleEnsemble(1, 0, {}), DimensionError);
  CHECK_THROWS_AS(ParticleEnsemble(2, 2, {1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(ParticleEnsemble(1, 2, {1, NAN}), DimensionError);
  CHECK_THROWS_AS(ParticleEnsemble(1, 2, {INFINITY, 0}), DimensionError);
}

TEST_CASE("pushforward by the zero field is the identity") {
  const auto mu = random_ensemble(7, 3, 11);
  CHECK(pushforward(mu, DisplacementField(7, 3)) == mu);
}

TEST_CASE("pushforward moves a single particle exactly") {
  ParticleEnsemble mu(1, 2, {1.0, 2.0});
  const auto out = pushforward(mu, DisplacementField(1, 2, {-1.0, -2.0}));
  CHECK(out(0, 0) == 0.0);
  CHECK(out(0, 1) == 0.0);
}

TEST_CASE("pushforward by minus the points collapses to the origin") {
  const auto mu = random_ensemble(3, 4, 5);
  DisplacementField t(3, 4, std::vector<double>(mu.points().begin(), mu.points().end()));
  const auto out = pushforward(mu, -t);
  for (double x : out.points()) CHECK(x == 0.0);
  for (double b : barycenter(out)) CHECK(b == 0.0);
}

TEST_CASE("pushforward shape mismatch is a dimension error") {
  const auto mu = random_ensemble(3, 2, 1);
  CHECK_THROWS_AS(pushforward(mu, DisplacementField(3, 3)), DimensionError);
  CHECK_THROWS_AS(pushforward(mu, DisplacementField(2, 2)), DimensionError);
}

TEST_CASE("pushforward then its negation returns within one rounding unit per step") {
  const auto mu = random_ensemble(20, 5, 9);
  const auto shift = random_ensemble(20, 5, 10);
  const auto t = DisplacementField(20, 5, std::vector<double>(shift.points().begin(), shift.points().end()));
  const auto back = pushforward(pushforward(mu, t), -t);
  for (std::size_t k = 0; k < mu.points().size(); ++k) {
    const double x = mu.points()[k];
    const double tol = 2.0 * std::numeric_limits<double>::epsilon() * (std::abs(x) + std::abs(t.values()[k]));
    CHECK(std::abs(back.points()[k] - x) <= tol);
  }
}

TEST_CASE("coordinate pushforward changes only the chosen column") {
  SUBCASE("zero shift") {
    const auto mu = random_ensemble(4, 3, 2);
    CHECK(coordinate_pushforward(mu, 1, std::vector<double>(4, 0.0)) == mu);
  }
  SUBCASE("exact single particle") {
    ParticleEnsemble mu(1, 2, {3.0, 4.0});
    const auto out = coordinate_pushforward(mu, 0, std::vector<double>{-3.0});
    CHECK(out(0, 0) == 0.0);
    CHECK(out(0, 1) == 4.0);
  }
  SUBCASE("other marginals are bitwise unchanged") {
    const auto mu = random_ensemble(50, 6, 3);
    const auto shift = random_ensemble(50, 1, 4);
    for (std::size_t i = 0; i < 6; ++i) {
      const auto out = coordinate_pushforward(mu, i, shift.points());
      for (std::size_t j = 0; j < 6; ++j) {
        if (j == i) continue;
        auto a = mu.column(j), b = out.column(j);
        CHECK(a == b);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
      }
      for (std::size_t n = 0; n < 50; ++n) CHECK(out(n, i) == mu(n, i) + shift(n, 0));
    }
  }
}

TEST_CASE("coordinate pushforward validates its arguments") {
  const auto mu = random_ensemble(4, 3, 2);
  CHECK_THROWS_AS(coordinate_pushforward(mu, 3, std::vector<double>(4, 0.0)), IndexError);
  CHECK_THROWS_AS(coordinate_pushforward(mu, 0, std::vector<double>(5, 0.0)), DimensionError);
}

TEST_CASE("mu norm") {
  CHECK(mu_norm_sq(DisplacementField(5, 3)) == 0.0);
  CHECK(mu_norm_sq(DisplacementField(2, 1, {1.0, -1.0})) == 1.0);
  CHECK(mu_norm_sq(GradientField(1, 2, {3.0, 4.0})) == 25.0);
}

TEST_CASE("restricting a field to coordinate i keeps only that column's norm") {
  const auto pts = random_ensemble(9, 4, 8);
  const DisplacementField t(9, 4, std::vector<double>(pts.points().begin(), pts.points().end()));
  for (std::size_t i = 0; i < 4; ++i) {
    const auto col = t.column(i);
    DisplacementField manual(9, 4);
    for (std::size_t n = 0; n < 9; ++n) manual(n, i) = col[n];
    CHECK(mu_norm_sq(t.restricted_to(i)) == mu_norm_sq(manual));
    CHECK(coordinate_displacement(9, 4, i, col).values().size() == 36);
    CHECK(mu_norm_sq(coordinate_displacement(9, 4, i, col)) == mu_norm_sq(manual));
  }
}

TEST_CASE("barycenter") {
  CHECK(barycenter(ParticleEnsemble(1, 2, {1.5, -2.0})) == std::vector<double>{1.5, -2.0});
  CHECK(barycenter(ParticleEnsemble(2, 2, {1.0, 0.0, -1.0, 0.0})) == std::vector<double>{0.0, 0.0});
  const auto b = barycenter(ParticleEnsemble(3, 2, {0.7, -0.3, 0.7, -0.3, 0.7, -0.3}));
  CHECK(b[0] == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(b[1] == doctest::Approx(-0.3).epsilon(1e-15));
}

TEST_CASE("mu inner product is bilinear with the norm") {
  const auto a = random_ensemble(6, 3, 21);
  const GradientField g(6, 3, std::vector<double>(a.points().begin(), a.points().end()));
  CHECK(mu_inner(g, g) == doctest::Approx(mu_norm_sq(g)).epsilon(1e-15));
}
