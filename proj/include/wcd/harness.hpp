#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "wcd/ensemble.hpp"
#include "wcd/functional.hpp"
#include "wcd/metrics.hpp"
#include "wcd/solvers.hpp"

namespace wcd {

/// Knobs of the built-in problem constructions. Only the fields relevant to
/// the chosen experiment are read.
struct ProblemParams {
  // example2: eigenvalue range of P and Q
  double eig_min = 1.0;
  double eig_max = 1e3;

  // example3: kernel rates, target size and initial Gaussian
  double rate_min = 1e-3;
  double rate_max = 1.0;
  std::size_t target_particles = 200;
  double init_shift = -0.5;
  double init_sigma = 0.5;

  // example4: interaction spectrum, regularizer construction and init
  double q_min = 1.0;
  double q_max = 1e3;
  double h_min = 1.5;
  double h_max = 4959.0;
  double eps = 1e-2;
  double mixing = 0.005;  // 0 draws a Haar orthogonal matrix
  double max_residual = 0.05;
  double init_mean = 0.125;
  double init_std = 0.125;

  // example5: data distribution, target and neuron initialization
  std::size_t data_samples = 500;
  double data_decay = 0.75;
  double data_bound = 3.0;
  double target_bias = 0.2;
  double target_offset = 0.1;
  double region_alpha = 3.0;
  double region_beta = 3.0;
  double region_weight = 8.0;
  double region_bias = 3.0;
  double init_alpha = 0.3;
  double init_beta = 0.3;
  double init_weight = 0.8;
  double init_bias = 0.3;

  // custom: quadratic potential and/or interaction, Gaussian init
  std::vector<std::vector<double>> potential;
  std::vector<std::vector<double>> interaction;
  double custom_init_sigma = 1.0;
};

struct ExperimentSpec {
  std::string name = "example1";
  std::size_t dimension = 2;
  std::size_t particles = 2000;
  std::size_t trials = 50;
  std::uint64_t budget = 2400;
  std::uint64_t seed = 0;
  std::vector<Method> methods{Method::wgd, Method::rwcd};
  std::uint64_t trace_stride = 1;
  int newton_iterations = 20;
  std::optional<double> wgd_step;
  std::optional<double> wpg_eta;
  ProblemParams params;

  /// Throws ConfigError when counts are zero, the method list is empty or the name is unknown.
  void validate() const;
};

/// Paper-scale defaults for a named experiment.
ExperimentSpec default_spec(const std::string& name);

/// A constructed problem: objective, starting ensemble and reference values.
struct Problem {
  std::string name;
  FunctionalPtr functional;
  ParticleEnsemble initial;
  std::optional<double> e_star;
  /// Construction-specific quantities kept for the run summary.
  nlohmann::json realized = nlohmann::json::object();
};

Problem build_example1(const ExperimentSpec& spec);
Problem build_example2(const ExperimentSpec& spec);
Problem build_example3(const ExperimentSpec& spec);
Problem build_example4(const ExperimentSpec& spec);
Problem build_example5(const ExperimentSpec& spec);
Problem build_custom(const ExperimentSpec& spec);
Problem build_problem(const ExperimentSpec& spec);

/// The exact 2x2 matrix used for both P and Q in the two-dimensional example.
Matrix example1_matrix();

struct TrialFailure {
  Method method;
  std::size_t trial;
  std::string message;
};

struct MethodResult {
  Method method;
  std::vector<ConvergenceTrace> traces;  // one per trial, partial traces included
  std::vector<bool> failed;
  std::map<std::string, AggregateCurve> aggregates;  // keyed by trace field name
  double step_parameter = 0.0;  // h, eta, or 0 for randomized methods
};

struct ExperimentResult {
  ExperimentSpec spec;
  Problem problem;
  std::vector<MethodResult> methods;
  std::vector<TrialFailure> failures;
  double wall_seconds = 0.0;
};

/// Builds the problem and runs every method. Randomized methods run
/// spec.trials times on independent streams; deterministic baselines once.
/// A diverging trial is recorded and the remaining trials still run.
ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = 1);

/// Smoothness constants and both schedules as a JSON object.
nlohmann::json constants_report(const Problem& problem);

}  // namespace wcd
