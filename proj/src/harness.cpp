#include "wcd/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "wcd/errors.hpp"
#include "wcd/functionals.hpp"
#include "wcd/linalg.hpp"
#include "wcd/nn.hpp"
#include "wcd/rng.hpp"
#include "wcd/sampling.hpp"

namespace wcd {

namespace {

const char* const kExperimentNames[] = {"example1", "example2", "example3", "example4", "example5", "custom"};

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows, std::size_t d, const char* what) {
  if (rows.size() != d) throw ConfigError(std::string(what) + " must be " + std::to_string(d) + "x" + std::to_string(d));
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    if (rows[i].size() != d) throw ConfigError(std::string(what) + " row " + std::to_string(i) + " has wrong length");
    for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

ParticleEnsemble initial_gaussian(const ExperimentSpec& spec, std::vector<double> mean, double sigma, std::size_t d) {
  return sample_ensemble(IsotropicGaussian{std::move(mean), sigma}, spec.particles, d,
                         splitmix64(spec.seed ^ stream::kInitialEnsemble));
}

}  // namespace

void ExperimentSpec::validate() const {
  bool known = false;
  for (const char* n : kExperimentNames) known = known || name == n;
  if (!known) throw ConfigError("unknown experiment '" + name + "'");
  if (dimension == 0) throw ConfigError("dimension must be positive");
  if (particles == 0) throw ConfigError("particles must be positive");
  if (trials == 0) throw ConfigError("trials must be positive");
  if (trace_stride == 0) throw ConfigError("trace_stride must be positive");
  if (newton_iterations <= 0) throw ConfigError("newton_iterations must be positive");
  if (methods.empty()) throw ConfigError("methods must list at least one solver");
  if (wgd_step && !(*wgd_step > 0.0)) throw ConfigError("wgd_step must be positive");
  if (wpg_eta && !(*wpg_eta > 0.0)) throw ConfigError("wpg_eta must be positive");
  if (name == "example1" && dimension != 2) throw ConfigError("example1 is two-dimensional");
}

ExperimentSpec default_spec(const std::string& name) {
  ExperimentSpec s;
  s.name = name;
  if (name == "example1") {
    s.dimension = 2;
    s.particles = 2000;
    s.budget = 2400;
    s.methods = {Method::wgd, Method::rwcd};
  } else if (name == "example2") {
    s.dimension = 50;
    s.particles = 2000;
    s.budget = 2000 * 50;
    s.trace_stride = 50;
    s.methods = {Method::wgd, Method::rwcd};
  } else if (name == "example3") {
    s.dimension = 50;
    s.particles = 200;
    s.budget = 2000 * 50;
    s.trace_stride = 50;
    s.methods = {Method::wgd, Method::rwcd};
  } else if (name == "example4") {
    s.dimension = 50;
    s.particles = 200;
    s.budget = 2000 * 50;
    s.trace_stride = 50;
    s.methods = {Method::wpg, Method::rwcp};
  } else if (name == "example5") {
    s.dimension = 50;
    s.particles = 200;
    s.budget = 2000 * 53;
    s.trace_stride = 53;
    s.methods = {Method::wgd, Method::rwcd};
  } else if (name == "custom") {
    s.dimension = 2;
    s.particles = 100;
    s.budget = 1000;
    s.trials = 10;
  } else {
    throw ConfigError("unknown experiment '" + name + "'");
  }
  return s;
}

Matrix example1_matrix() {
  Matrix m(2, 2);
  const double off = 11100.0 / 1111.0;
  m << 1000.0, off, off, 1.0;
  return m;
}

Problem build_example1(const ExperimentSpec& spec) {
  const Matrix m = example1_matrix();
  auto p = quadratic_potential(m);
  auto q = quadratic_interaction(m);
  Problem out{"example1", std::make_shared<SumFunctional>(std::vector<FunctionalPtr>{p, q}, 0.0),
              initial_gaussian(spec, {}, 1.0, 2), 0.0};
  const double l_p = p->smoothness().global;
  const double l_q = q->smoothness().global;
  out.realized["L_potential"] = l_p;
  out.realized["L_interaction"] = l_q;
  out.realized["L_computed"] = l_p + l_q;
  out.realized["L_reported"] = 2000.1;
  return out;
}

Problem build_example2(const ExperimentSpec& spec) {
  const std::size_t d = spec.dimension;
  const auto lambda = log_spaced(spec.params.eig_min, spec.params.eig_max, d);
  Vector lam = Eigen::Map<const Vector>(lambda.data(), static_cast<Eigen::Index>(d));

  // V1 is drawn before V2 from the same stream.
  Rng data(splitmix64(spec.seed ^ stream::kProblemData));
  const Matrix v1 = random_orthogonal(d, data);
  const Matrix v2 = random_orthogonal(d, data);
  Matrix p = v1 * lam.asDiagonal() * v1.transpose();
  Matrix q = v2 * lam.asDiagonal() * v2.transpose();
  p = 0.5 * (p + p.transpose()).eval();
  q = 0.5 * (q + q.transpose()).eval();

  auto fp = quadratic_potential(p);
  auto fq = quadratic_interaction(q);
  Problem out{"example2", std::make_shared<SumFunctional>(std::vector<FunctionalPtr>{fp, fq}, 0.0),
              initial_gaussian(spec, {}, 1.0, d), 0.0};
  out.realized["L_potential"] = fp->smoothness().global;
  out.realized["L_interaction"] = fq->smoothness().global;
  out.realized["L_computed"] = fp->smoothness().global + fq->smoothness().global;
  out.realized["trace_P"] = p.trace();
  out.realized["trace_Q"] = q.trace();
  out.realized["eigenvalues"] = lambda;
  return out;
}

Problem build_example3(const ExperimentSpec& spec) {
  const std::size_t d = spec.dimension;
  auto rates = log_spaced(spec.params.rate_min, spec.params.rate_max, d);
  if (spec.params.target_particles == 0) throw ConfigError("params.target_particles must be positive");
  ParticleEnsemble target = sample_ensemble(IsotropicGaussian{{}, 1.0}, spec.params.target_particles, d,
                                            splitmix64(spec.seed ^ stream::kProblemData));
  std::vector<double> mean(d, 0.0);
  mean[0] = spec.params.init_shift;
  auto f = mmd_energy(std::move(target), rates);
  Problem out{"example3", f, initial_gaussian(spec, mean, spec.params.init_sigma, d), 0.0};
  out.realized["rates"] = rates;
  return out;
}

Problem build_example4(const ExperimentSpec& spec) {
  const std::size_t d = spec.dimension;
  const ProblemParams& prm = spec.params;
  if (!(prm.eps > 0.0)) throw ConfigError("params.eps must be positive");

  const auto qdiag = log_spaced(prm.q_min, prm.q_max, d);
  Matrix q = Matrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = qdiag[i];

  Rng data(splitmix64(spec.seed ^ stream::kProblemData));
  const Matrix a = random_orthogonal(d, data, prm.mixing);

  // H_i = eps^-1 sum_j r_j A_ji^2, i.e. B r = eps H with B_ij = A_ji^2.
  const auto h_target = log_spaced(prm.h_min, prm.h_max, d);
  Vector rhs(static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) rhs(static_cast<Eigen::Index>(i)) = prm.eps * h_target[i];
  const Matrix b = a.transpose().cwiseProduct(a.transpose());
  Vector r = b.colPivHouseholderQr().solve(rhs);
  std::size_t clamped = 0;
  for (Eigen::Index j = 0; j < r.size(); ++j) {
    if (r(j) < 0.0) {
      r(j) = 0.0;
      ++clamped;
    }
  }
  const double residual = (b * r - rhs).norm() / rhs.norm();
  if (!(residual <= prm.max_residual)) {
    throw ConfigError("example4 regularizer weights miss the target H_i by " + std::to_string(100.0 * residual) +
                      "% (limit " + std::to_string(100.0 * prm.max_residual) + "%); try another seed or mixing");
  }

  auto reg = smoothed_l1_potential(to_vector(r), a, prm.eps);
  const double e_star = reg->minimum_value();
  auto g = quadratic_interaction(q);
  Problem out{"example4", composite(g, reg, e_star),
              initial_gaussian(spec, std::vector<double>(d, prm.init_mean), prm.init_std, d), e_star};
  out.realized["H_target"] = h_target;
  out.realized["H_realized"] = reg->smoothness().coord;
  out.realized["H_global"] = reg->smoothness().global;
  out.realized["weights"] = to_vector(r);
  out.realized["weights_clamped"] = clamped;
  out.realized["relative_residual"] = residual;
  out.realized["E_star"] = e_star;
  out.realized["Q_diagonal"] = qdiag;
  return out;
}

Problem build_example5(const ExperimentSpec& spec) {
  const std::size_t d = spec.dimension;
  const ProblemParams& prm = spec.params;

  std::vector<double> variances(d);
  std::vector<double> w_star(d);
  double norm = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    variances[j] = std::pow(prm.data_decay, static_cast<double>(j));
    w_star[j] = std::pow(prm.data_decay, 0.5 * static_cast<double>(j + 1));
    norm += w_star[j] * w_star[j];
  }
  norm = std::sqrt(norm);
  for (double& w : w_star) w /= norm;

  if (prm.data_samples == 0) throw ConfigError("params.data_samples must be positive");
  const ParticleEnsemble xs = sample_ensemble(TruncatedGaussian{variances, prm.data_bound}, prm.data_samples, d,
                                              splitmix64(spec.seed ^ stream::kProblemData));
  Matrix data(static_cast<Eigen::Index>(prm.data_samples), static_cast<Eigen::Index>(d));
  std::vector<double> targets(prm.data_samples);
  for (std::size_t k = 0; k < prm.data_samples; ++k) {
    double s = prm.target_bias;
    for (std::size_t j = 0; j < d; ++j) {
      data(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = xs(k, j);
      s += w_star[j] * xs(k, j);
    }
    targets[k] = std::tanh(s) + prm.target_offset;
  }

  const NnRegion region{prm.region_alpha, prm.region_beta, prm.region_weight, prm.region_bias};
  auto f = std::make_shared<TwoLayerNnEnergy>(std::move(data), targets, region, 0.0);

  // Blocks drawn in layout order alpha, beta, w, b from one stream.
  Rng init(splitmix64(spec.seed ^ stream::kInitialEnsemble));
  const std::size_t n = spec.particles;
  auto alpha = sample_ensemble(UniformBox{{-prm.init_alpha}, {prm.init_alpha}}, n, 1, init);
  auto beta = sample_ensemble(UniformBox{{-prm.init_beta}, {prm.init_beta}}, n, 1, init);
  auto w = sample_ensemble(UniformBall{prm.init_weight}, n, d, init);
  auto bias = sample_ensemble(UniformBox{{-prm.init_bias}, {prm.init_bias}}, n, 1, init);
  ParticleEnsemble mu0 = hstack({alpha, beta, w, bias});
  if (!f->in_region(mu0)) throw ConfigError("example5 initial neurons fall outside the working region");

  const NnSmoothness& sm = f->smoothness_detail();
  Problem out{"example5", f, std::move(mu0), 0.0};
  out.realized["w_star"] = w_star;
  out.realized["L_global"] = sm.global;
  out.realized["L_alpha"] = sm.alpha;
  out.realized["L_beta"] = sm.beta;
  out.realized["L_bias"] = sm.bias;
  out.realized["L_weights"] = sm.weights;
  out.realized["L_reported"] = 125.033;
  out.realized["data_acceptance"] = truncated_gaussian_acceptance(TruncatedGaussian{variances, prm.data_bound});
  return out;
}

Problem build_custom(const ExperimentSpec& spec) {
  const std::size_t d = spec.dimension;
  std::vector<FunctionalPtr> terms;
  if (!spec.params.potential.empty())
    terms.push_back(quadratic_potential(matrix_from_rows(spec.params.potential, d, "params.potential")));
  if (!spec.params.interaction.empty())
    terms.push_back(quadratic_interaction(matrix_from_rows(spec.params.interaction, d, "params.interaction")));
  if (terms.empty()) throw ConfigError("custom experiment needs params.potential and/or params.interaction");
  if (!(spec.params.custom_init_sigma > 0.0)) throw ConfigError("params.custom_init_sigma must be positive");
  // Quadratic potentials and interactions are minimized by delta_0.
  FunctionalPtr f = terms.size() == 1 ? terms.front() : std::make_shared<SumFunctional>(terms, 0.0);
  std::optional<double> e_star = 0.0;
  return Problem{"custom", f, initial_gaussian(spec, {}, spec.params.custom_init_sigma, d), e_star};
}

Problem build_problem(const ExperimentSpec& spec) {
  spec.validate();
  if (spec.name == "example1") return build_example1(spec);
  if (spec.name == "example2") return build_example2(spec);
  if (spec.name == "example3") return build_example3(spec);
  if (spec.name == "example4") return build_example4(spec);
  if (spec.name == "example5") return build_example5(spec);
  return build_custom(spec);
}

// ---------------------------------------------------------------------------

namespace {

MethodResult run_method(const ExperimentSpec& spec, const Problem& problem, Method method, unsigned threads,
                        std::vector<TrialFailure>& failures) {
  const SmoothnessProfile profile = problem.functional->smoothness();
  MethodResult res;
  res.method = method;

  SolverConfig base;
  base.method = method;
  base.budget = spec.budget;
  base.newton_iterations = spec.newton_iterations;
  base.trace_stride = spec.trace_stride;

  std::optional<Schedule> schedule;
  if (method == Method::wgd) {
    base.step = spec.wgd_step.value_or(default_wgd_step(profile));
    res.step_parameter = *base.step;
  } else if (method == Method::wpg) {
    base.step = spec.wpg_eta.value_or(default_wpg_parameter(profile));
    res.step_parameter = *base.step;
  } else {
    schedule = schedule_from_profile(profile, method == Method::rwcd ? ScheduleMode::rwcd : ScheduleMode::rwcp);
  }

  const std::size_t trials = is_randomized(method) ? spec.trials : 1;
  res.traces.resize(trials);
  res.failed.assign(trials, false);
  std::vector<std::string> messages(trials);

  std::atomic<std::size_t> next{0};
  std::exception_ptr fatal;
  std::mutex fatal_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < trials; t = next++) {
      SolverConfig cfg = base;
      cfg.seed = trial_seed(spec.seed, t);
      try {
        res.traces[t] = run(problem.initial, *problem.functional, cfg, schedule);
      } catch (const SolverDivergence& e) {
        res.traces[t] = e.partial();
        res.failed[t] = true;
        messages[t] = e.what();
      } catch (...) {
        std::lock_guard<std::mutex> lock(fatal_mutex);
        if (!fatal) fatal = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (fatal) std::rethrow_exception(fatal);

  for (std::size_t t = 0; t < trials; ++t)
    if (res.failed[t]) failures.push_back({method, t, messages[t]});

  res.aggregates["energy"] = aggregate(res.traces, field::energy);
  res.aggregates["grad_norm_sq"] = aggregate(res.traces, field::grad_norm_sq);
  res.aggregates["running_min_grad_norm_sq"] = aggregate(res.traces, field::running_min_grad_norm_sq);
  res.aggregates["barycenter_norm"] = aggregate(res.traces, field::barycenter_norm);
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult out{spec, build_problem(spec), {}, {}, 0.0};
  for (Method m : spec.methods) {
    if (is_proximal(m) && !dynamic_cast<const CompositeFunctional*>(out.problem.functional.get()))
      throw ConfigError(to_string(m) + " needs a composite problem (example4)");
    out.methods.push_back(run_method(spec, out.problem, m, threads, out.failures));
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

nlohmann::json constants_report(const Problem& problem) {
  const SmoothnessProfile p = problem.functional->smoothness();
  nlohmann::json j;
  j["experiment"] = problem.name;
  j["functional"] = problem.functional->name();
  j["dimension"] = p.dim();
  j["L_global"] = p.global;
  j["L_coord"] = p.coord;
  j["L_sum"] = p.coord_sum();
  if (p.reg_coord) {
    j["H_coord"] = *p.reg_coord;
    j["H_global"] = p.reg_global.value_or(0.0);
  }
  if (problem.e_star) j["E_star"] = *problem.e_star;

  const Schedule cd = schedule_from_profile(p, ScheduleMode::rwcd);
  j["rwcd"] = {{"p", cd.probabilities}, {"gamma", cd.parameters}};
  const Schedule cp = schedule_from_profile(p, ScheduleMode::rwcp);
  j["rwcp"] = {{"p", cp.probabilities}, {"eta", cp.parameters}, {"C", p.prox_complexity()}};
  j["wgd_step"] = default_wgd_step(p);
  if (p.reg_coord) j["wpg_eta"] = default_wpg_parameter(p);
  j["realized"] = problem.realized;
  return j;
}

}  // namespace wcd
