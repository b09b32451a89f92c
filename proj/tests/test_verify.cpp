#include <cmath>

#include "doctest.h"
#include "wcd/errors.hpp"
#include "wcd/functionals.hpp"
#include "wcd/harness.hpp"
#include "wcd/sampling.hpp"
#include "wcd/verify.hpp"

using namespace wcd;

namespace {

// Quadratic potential whose gradient and constants can be made wrong on purpose.
class Tampered final : public EnergyFunctional {
 public:
  Tampered(Matrix p, double grad_scale, double const_scale)
      : inner_(std::move(p)), grad_scale_(grad_scale), const_scale_(const_scale) {}
  std::size_t dim() const override { return inner_.dim(); }
  std::string name() const override { return "tampered"; }
  double energy(const ParticleEnsemble& mu) const override { return inner_.energy(mu); }
  GradientField grad(const ParticleEnsemble& mu) const override {
    GradientField g = inner_.grad(mu);
    for (std::size_t n = 0; n < mu.size(); ++n)
      for (std::size_t j = 0; j < mu.dim(); ++j) g(n, j) *= grad_scale_;
    return g;
  }
  std::vector<double> coord_grad(const ParticleEnsemble& mu, std::size_t i) const override {
    auto g = inner_.coord_grad(mu, i);
    for (double& v : g) v *= grad_scale_;
    return g;
  }
  SmoothnessProfile smoothness() const override {
    auto p = inner_.smoothness();
    p.global *= const_scale_;
    for (double& c : p.coord) c *= const_scale_;
    return p;
  }

 private:
  QuadraticPotential inner_;
  double grad_scale_, const_scale_;
};

Matrix spd(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) a(i, j) = rng.normal();
  return a * a.transpose() + Matrix::Identity(d, d);
}

EnsembleSampler gaussian_sampler(std::size_t n, std::size_t d) {
  return [=](Rng& rng) { return sample_ensemble(IsotropicGaussian{{}, 1.0}, n, d, rng.next_u64()); };
}

}  // namespace

TEST_CASE("finite differences accept the true gradient and reject a wrong one") {
  const Matrix p = spd(4, 1);
  const auto mu = sample_ensemble(IsotropicGaussian{{}, 1.0}, 6, 4, 2);
  CHECK(fd_gradient_check(Tampered(p, 1.0, 1.0), mu).passed);
  const auto bad = fd_gradient_check(Tampered(p, 1.01, 1.0), mu);
  CHECK_FALSE(bad.passed);
  CHECK(bad.max_error == doctest::Approx(0.01 / 1.01).epsilon(1e-3));
  CHECK(bad.worst.contains("particle"));
}

TEST_CASE("certificate accepts true constants and flags underestimates") {
  const Matrix p = spd(3, 4);
  CertificateOptions opt;
  opt.draws = 100;
  const auto good = smoothness_certificate(Tampered(p, 1.0, 1.0), gaussian_sampler(5, 3), opt);
  CHECK(good.passed);
  CHECK(good.max_error <= 1e-6);
  const auto bad = smoothness_certificate(Tampered(p, 1.0, 0.5), gaussian_sampler(5, 3), opt);
  CHECK_FALSE(bad.passed);
  CHECK(bad.max_error > 0.1);
}

TEST_CASE("certificate is tight for a diagonal quadratic") {
  Matrix p = Matrix::Zero(3, 3);
  p.diagonal() << 1.0, 5.0, 9.0;
  CertificateOptions opt;
  opt.draws = 50;
  const auto r = smoothness_certificate(QuadraticPotential(p), gaussian_sampler(4, 3), opt);
  CHECK(r.passed);
  // Both inequalities hold with equality up to rounding.
  CHECK(std::abs(r.max_error) <= 1e-10);
}

TEST_CASE("expected descent identity") {
  const QuadraticPotential f(spd(5, 6));
  const auto s = schedule_from_profile(f.smoothness(), ScheduleMode::rwcd);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto mu = sample_ensemble(IsotropicGaussian{{}, 2.0}, 7, 5, seed);
    const auto r = expected_descent_identity(f, mu, s);
    CHECK(r.passed);
    CHECK(r.max_error <= 1e-9);
  }
  // A wrong schedule breaks the identity.
  auto wrong = s;
  for (double& g : wrong.parameters) g *= 0.5;
  CHECK_FALSE(expected_descent_identity(f, sample_ensemble(IsotropicGaussian{{}, 1.0}, 7, 5, 1), wrong).passed);
}

TEST_CASE("subproblem oracles") {
  Rng rng(3);
  const auto reg = smoothed_l1_potential({0.3, 1.0}, random_orthogonal(2, rng), 0.05);
  const std::vector<double> x{0.4, -0.1}, g{0.7, -1.2};
  CHECK(scalar_subproblem_check(*reg, x, 0, 0.7, 3.0).passed);
  CHECK(scalar_subproblem_check(*reg, x, 1, -1.2, 0.5).passed);
  const auto v = vector_subproblem_check(*reg, x, g, 2.0);
  CHECK(v.passed);
  CHECK(v.tolerance == doctest::Approx(2e-3));
  // With no Newton iterations the bisection fallback alone must land on the minimizer.
  const auto cut = scalar_subproblem_check(*reg, std::vector<double>{0.0, 0.0}, 0, 0.01, 0.1, 0);
  CHECK(cut.instances == 1);
  CHECK(cut.passed);
}

TEST_CASE("report merging keeps the worst instance") {
  CheckReport a("x", 1.0), b("x", 1.0);
  a.record(0.2, {{"k", 1}});
  b.record(2.0, {{"k", 2}});
  b.record(0.5, {{"k", 3}});
  a.merge(b);
  CHECK(a.instances == 3);
  CHECK(a.max_error == 2.0);
  CHECK(a.worst["k"] == 2);
  CHECK_FALSE(a.passed);
  const auto j = a.to_json();
  CHECK(j["instances"] == 3);
}

TEST_CASE("family cases cover every family and pass their own oracles") {
  const auto cases = family_cases(true, 1);
  std::vector<std::string> names;
  for (const auto& c : cases) names.push_back(c.family);
  for (const char* f : {"quadratic_potential", "quadratic_interaction", "mmd", "function_of_mean", "smoothed_l1",
                        "two_layer_nn", "composite"})
    CHECK(std::find(names.begin(), names.end(), f) != names.end());
  for (const auto& c : cases) {
    CAPTURE(c.family);
    Rng rng(9);
    const auto mu = c.sampler(rng);
    CHECK(mu.dim() <= 5);
    CHECK(mu.size() <= 10);
    CHECK(fd_gradient_check(*c.functional, mu).passed);
  }
}

TEST_CASE("suites") {
  CHECK(suite_names().size() >= 5);
  CHECK_THROWS_AS(run_suite("bogus", true), ConfigError);
  for (const char* s : {"fd-grad", "descent-identity", "subproblem"}) {
    const auto reports = run_suite(s, true, "", 2);
    CHECK_FALSE(reports.empty());
    for (const auto& r : reports) {
      CAPTURE(r.name);
      CHECK(r.passed);
      CHECK(r.instances > 0);
    }
  }
  const auto one = run_suite("smoothness", true, "mmd", 0);
  REQUIRE(one.size() == 1);
  CHECK(one[0].passed);
}

TEST_CASE("example cases") {
  for (const char* name : {"example1", "example2", "example3", "example4", "example5"}) {
    const auto c = example_case(name, true, 0);
    Rng rng(1);
    const auto mu = c.sampler(rng);
    CAPTURE(name);
    CHECK(mu.dim() == c.functional->dim());
    if (c.admissible) CHECK(c.admissible(mu));
  }
  CHECK_THROWS_AS(example_case("example0", true, 0), ConfigError);
}
