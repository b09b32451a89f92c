#include <algorithm>
#include <chrono>
#include <cmath>

#include "doctest.h"
#include "wcd/config.hpp"
#include "wcd/errors.hpp"
#include "wcd/harness.hpp"
#include "wcd/nn.hpp"

using namespace wcd;

namespace {

ExperimentSpec reduced(const std::string& name, std::size_t d = 10, std::size_t n = 40) {
  ExperimentSpec s = default_spec(name);
  if (name != "example1") s.dimension = d;
  s.particles = n;
  return s;
}

}  // namespace

TEST_CASE("default specs validate and reject bad values") {
  for (const char* name : {"example1", "example2", "example3", "example4", "example5"}) CHECK_NOTHROW(default_spec(name).validate());
  CHECK_THROWS_AS(default_spec("example9"), ConfigError);
  auto s = default_spec("example1");
  s.dimension = 3;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = default_spec("example2");
  s.particles = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = default_spec("example2");
  s.methods.clear();
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = default_spec("example2");
  s.trials = 0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("two-dimensional example constants") {
  const Problem p = build_example1(default_spec("example1"));
  const auto prof = p.functional->smoothness();
  CHECK(prof.coord[0] == doctest::Approx(2000.0).epsilon(1e-15));
  CHECK(prof.coord[1] == doctest::Approx(2.0).epsilon(1e-15));
  // Largest eigenvalue of the 2x2 matrix, doubled for potential plus interaction.
  const Matrix m = example1_matrix();
  const double tr = m(0, 0) + m(1, 1), det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const double top = 0.5 * (tr + std::sqrt(tr * tr - 4.0 * det));
  CHECK(prof.global == doctest::Approx(2.0 * top).epsilon(1e-9));
  CHECK(p.realized["L_reported"].get<double>() == 2000.1);
  CHECK(std::abs(prof.global - 2000.1) < 0.11);
  CHECK(p.initial.size() == 2000);
}

TEST_CASE("quadratic example constants") {
  const Problem p = build_problem(default_spec("example2"));
  CHECK(std::abs(p.functional->smoothness().global - 2000.0) <= 1e-6);
  const auto eig = p.realized["eigenvalues"].get<std::vector<double>>();
  double sum = 0.0;
  for (double v : eig) sum += v;
  CHECK(p.realized["trace_P"].get<double>() == doctest::Approx(sum).epsilon(1e-12));
  CHECK(p.realized["trace_Q"].get<double>() == doctest::Approx(sum).epsilon(1e-12));
  CHECK(eig.front() == doctest::Approx(1.0));
  CHECK(eig.back() == doctest::Approx(1000.0));
  CHECK(p.e_star == 0.0);
}

TEST_CASE("MMD example constants and initial mean") {
  const Problem p = build_problem(default_spec("example3"));
  CHECK(p.functional->smoothness().global == doctest::Approx(4.0).epsilon(1e-12));
  const auto b = barycenter(p.initial);
  // N = 200, sigma = 0.5: the sample mean has standard error 0.035.
  CHECK(std::abs(b[0] + 0.5) < 0.15);
  for (std::size_t j = 1; j < b.size(); ++j) CHECK(std::abs(b[j]) < 0.15);
}

TEST_CASE("composite example constants") {
  const Problem p = build_problem(default_spec("example4"));
  const auto prof = p.functional->smoothness();
  REQUIRE(prof.reg_coord.has_value());
  const auto& h = *prof.reg_coord;
  const double lo = *std::min_element(h.begin(), h.end());
  const double hi = *std::max_element(h.begin(), h.end());
  const double tol = p.realized["relative_residual"].get<double>();
  CAPTURE(lo);
  CAPTURE(hi);
  CHECK(tol <= 0.05);
  CHECK(hi == doctest::Approx(4959.0).epsilon(0.1));
  CHECK(lo > 0.0);
  CHECK(prof.coord[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(prof.coord.back() == doctest::Approx(1000.0).epsilon(1e-12));

  // E at the all-origin ensemble is the reported minimum.
  const ParticleEnsemble origin(50, 50, std::vector<double>(2500, 0.0));
  CHECK(std::abs(p.functional->energy(origin) - *p.e_star) <= 1e-12);

  // H_global = max_j r_j / eps.
  const auto w = p.realized["weights"].get<std::vector<double>>();
  CHECK(p.realized["H_global"].get<double>() == doctest::Approx(*std::max_element(w.begin(), w.end()) / 1e-2).epsilon(1e-12));
}

TEST_CASE("network example construction") {
  const Problem p = build_problem(default_spec("example5"));
  const auto w = p.realized["w_star"].get<std::vector<double>>();
  double norm = 0.0;
  for (double v : w) norm += v * v;
  CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p.initial.dim() == 53);
  CHECK(p.functional->dim() == 53);
  const auto& f = dynamic_cast<const TwoLayerNnEnergy&>(*p.functional);
  CHECK(f.in_region(p.initial));
  for (std::size_t n = 0; n < p.initial.size(); ++n) {
    CHECK(std::abs(p.initial(n, 0)) <= 0.3);
    CHECK(std::abs(p.initial(n, 52)) <= 0.3);
  }
}

TEST_CASE("builders are pure functions of the spec") {
  for (const char* name : {"example1", "example2", "example3", "example4", "example5"}) {
    const auto spec = reduced(name);
    const Problem a = build_problem(spec), b = build_problem(spec);
    CHECK(a.initial == b.initial);
    CHECK(a.functional->energy(a.initial) == b.functional->energy(b.initial));
    CHECK(a.realized == b.realized);
    auto other = spec;
    other.seed += 1;
    CHECK_FALSE(build_problem(other).initial == a.initial);
  }
}

TEST_CASE("coordinate constants never exceed the global one") {
  for (const char* name : {"example1", "example2", "example3", "example4", "example5"}) {
    const Problem p = build_problem(default_spec(name));
    const auto prof = p.functional->smoothness();
    CAPTURE(name);
    CHECK(*std::max_element(prof.coord.begin(), prof.coord.end()) <= prof.global + 1e-6);
  }
}

TEST_CASE("custom problems") {
  ExperimentSpec s = default_spec("custom");
  CHECK_THROWS_AS(build_problem(s), ConfigError);
  s.params.potential = {{2.0, 0.0}, {0.0, 1.0}};
  CHECK(build_problem(s).functional->smoothness().global == doctest::Approx(2.0));
  s.params.interaction = {{1.0, 0.0}, {0.0, 1.0}};
  CHECK(build_problem(s).functional->smoothness().global == doctest::Approx(3.0));
  s.params.interaction = {{1.0, 0.0, 0.0}};
  CHECK_THROWS_AS(build_problem(s), ConfigError);
  s.params.interaction.clear();
  s.params.potential = {{1.0, 2.0}, {0.0, 1.0}};
  CHECK_THROWS_AS(build_problem(s), ConfigError);
}

TEST_CASE("one trial gives a band equal to the trace") {
  auto s = reduced("example2", 6, 20);
  s.trials = 1;
  s.budget = 60;
  const auto r = run_experiment(s);
  for (const auto& m : r.methods) {
    REQUIRE(m.traces.size() == 1);
    const auto& agg = m.aggregates.at("energy");
    REQUIRE(agg.work.size() == m.traces[0].records.size());
    for (std::size_t k = 0; k < agg.work.size(); ++k) {
      CHECK(agg.median[k] == m.traces[0].records[k].energy);
      CHECK(agg.p10[k] == agg.median[k]);
      CHECK(agg.p90[k] == agg.median[k]);
    }
  }
}

TEST_CASE("experiments are deterministic and thread-count independent") {
  auto s = reduced("example3", 8, 20);
  s.trials = 4;
  s.budget = 100;
  const auto a = run_experiment(s, 1), b = run_experiment(s, 3);
  REQUIRE(a.methods.size() == b.methods.size());
  for (std::size_t m = 0; m < a.methods.size(); ++m)
    for (std::size_t t = 0; t < a.methods[m].traces.size(); ++t) {
      const auto& x = a.methods[m].traces[t].records;
      const auto& y = b.methods[m].traces[t].records;
      REQUIRE(x.size() == y.size());
      for (std::size_t k = 0; k < x.size(); ++k) CHECK(x[k].energy == y[k].energy);
    }
}

TEST_CASE("proximal methods need the composite problem") {
  auto s = reduced("example2", 4, 5);
  s.methods = {Method::rwcp};
  CHECK_THROWS_AS(run_experiment(s), ConfigError);
}

TEST_CASE("a diverging baseline is recorded and the run continues") {
  auto s = reduced("example2", 4, 5);
  s.wgd_step = 1.0;  // far above 2/L
  s.budget = 400;
  s.trials = 2;
  const auto r = run_experiment(s);
  REQUIRE(r.failures.size() == 1);
  CHECK(r.failures[0].method == Method::wgd);
  CHECK(r.methods[0].failed[0]);
  CHECK(r.methods[1].traces.size() == 2);
  CHECK_FALSE(r.methods[1].failed[0]);
}

TEST_CASE("small presets run quickly") {
  for (int k = 1; k <= 5; ++k) {
    const auto path = std::string(WCD_SOURCE_DIR) + "/configs/ci/example" + std::to_string(k) + ".yaml";
    const auto spec = load_config(path);
    const auto start = std::chrono::steady_clock::now();
    const auto r = run_experiment(spec);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CAPTURE(path);
    CHECK(secs < 5.0);
    CHECK(r.failures.empty());
  }
}

TEST_CASE("constants report") {
  const Problem p = build_problem(reduced("example4", 6, 5));
  const auto j = constants_report(p);
  CHECK(j["L_coord"].size() == 6);
  CHECK(j["H_coord"].size() == 6);
  CHECK(j.contains("wpg_eta"));
  double sum = 0.0;
  for (double v : j["rwcp"]["p"].get<std::vector<double>>()) sum += v;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
  const auto q = constants_report(build_problem(reduced("example1")));
  CHECK_FALSE(q.contains("H_coord"));
  CHECK(q["rwcd"]["p"][0].get<double>() == doctest::Approx(1000.0 / 1001.0));
}
