#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wcd/functional.hpp"
#include "wcd/functionals.hpp"
#include "wcd/rng.hpp"
#include "wcd/solvers.hpp"

namespace wcd {

/// Outcome of one oracle over one or more instances.
struct CheckReport {
  std::string name;
  std::size_t instances = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = true;
  nlohmann::json worst;  // instance that produced max_error

  CheckReport() = default;
  CheckReport(std::string check_name, double tol) : name(std::move(check_name)), tolerance(tol) {}

  /// Counts one instance and keeps it if it is the worst so far.
  void record(double error, nlohmann::json instance);
  /// Folds another report of the same check into this one.
  void merge(const CheckReport& other);
  nlohmann::json to_json() const;
};

/// Central differences of the particle energy against the gradient field:
/// N dE/dx_ni vs grad(mu)(n, i), step rel_step * (1 + |x_ni|).
/// Error is |fd - grad|_inf / max(|grad|_inf, 1e-6).
CheckReport fd_gradient_check(const EnergyFunctional& functional, const ParticleEnsemble& mu,
                              double tolerance = 1e-5, double rel_step = 1e-5);

using EnsembleSampler = std::function<ParticleEnsemble(Rng&)>;
using Admissible = std::function<bool(const ParticleEnsemble&)>;

struct CertificateOptions {
  std::size_t draws = 200;
  double magnitude = 0.5;  // T_n ~ magnitude * N(0, 1)
  std::uint64_t seed = 0;
  double slack = 1e-6;
  std::optional<std::size_t> coordinate;  // drawn uniformly per draw when empty
};

/// Empirical coordinate-smoothness certificate with constant L_i + H_i:
/// the pullback Lipschitz bound and the one-sided descent bound, each as a
/// relative excess over the bound. When `admissible` is given, T is halved
/// until the pushed ensemble satisfies it.
CheckReport smoothness_certificate(const EnergyFunctional& functional, const EnsembleSampler& sampler,
                                   const CertificateOptions& options, const Admissible& admissible = {});

/// sum_i p_i E[mu after the gamma_i step on i] against E - |grad|^2 / (2 L_sum),
/// relative to |E[mu]|. Exact for a quadratic potential.
CheckReport expected_descent_identity(const QuadraticPotential& functional, const ParticleEnsemble& mu,
                                      const Schedule& schedule, double tolerance = 1e-9);

/// Newton solution of min_s s g + eta/2 s^2 + V(x + s e_i) against a zooming
/// grid search on pointwise values of V. Tolerance 1e-6 (1 + |s|).
CheckReport scalar_subproblem_check(const PotentialRegularizer& regularizer, std::span<const double> x,
                                    std::size_t i, double gradient, double eta, int newton_iterations = 20);

/// Newton solution of min_v v.g + eta/2 |v|^2 + V(x + v) against a
/// coarse-to-fine grid search ending at `resolution`; tolerance 2 * resolution
/// per component. Intended for d <= 4.
CheckReport vector_subproblem_check(const PotentialRegularizer& regularizer, std::span<const double> x,
                                    std::span<const double> gradient, double eta, int newton_iterations = 20,
                                    double resolution = 1e-3);

/// A functional together with a way to draw test ensembles for it.
struct VerifyCase {
  std::string family;
  FunctionalPtr functional;
  EnsembleSampler sampler;
  Admissible admissible;
  double magnitude = 0.5;
};

/// Small instances of every built-in family (quadratic potential,
/// interaction, MMD, function of the mean, smoothed L1, two-layer network,
/// composite). `small` keeps N <= 10 and d <= 5.
std::vector<VerifyCase> family_cases(bool small, std::uint64_t seed);

/// exampleK problems at reduced (small) or default size with matching samplers.
VerifyCase example_case(const std::string& name, bool small, std::uint64_t seed);

/// Suites behind the `check` command. `functional` filters by family or
/// example name; empty runs the default set.
std::vector<CheckReport> run_suite(const std::string& suite, bool small, const std::string& functional = "",
                                   std::uint64_t seed = 0);

/// Suite names accepted by run_suite.
const std::vector<std::string>& suite_names();

}  // namespace wcd
