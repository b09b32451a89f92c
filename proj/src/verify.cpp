#include "wcd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wcd/errors.hpp"
#include "wcd/harness.hpp"
#include "wcd/linalg.hpp"
#include "wcd/nn.hpp"
#include "wcd/sampling.hpp"

namespace wcd {

void CheckReport::record(double error, nlohmann::json instance) {
  ++instances;
  // NaN errors always count as worst.
  if (instances == 1 || !(error <= max_error)) {
    max_error = error;
    worst = std::move(instance);
  }
  passed = max_error <= tolerance;
}

void CheckReport::merge(const CheckReport& other) {
  if (other.instances == 0) return;
  const std::size_t before = instances;
  if (before == 0 || !(other.max_error <= max_error)) {
    max_error = other.max_error;
    worst = other.worst;
  }
  if (before == 0) tolerance = other.tolerance;
  instances = before + other.instances;
  passed = (before == 0 || passed) && other.passed;
}

nlohmann::json CheckReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["instances"] = instances;
  j["max_error"] = std::isfinite(max_error) ? nlohmann::json(max_error) : nlohmann::json("non-finite");
  j["tolerance"] = tolerance;
  j["passed"] = passed;
  if (!passed) j["worst_instance"] = worst;
  return j;
}

// ---------------------------------------------------------------------------
// Finite differences

CheckReport fd_gradient_check(const EnergyFunctional& functional, const ParticleEnsemble& mu, double tolerance,
                              double rel_step) {
  CheckReport report("fd-grad:" + functional.name(), tolerance);
  const std::size_t n = mu.size(), d = mu.dim();
  const GradientField g = functional.grad(mu);
  double scale = 0.0;
  for (double v : g.values()) scale = std::max(scale, std::abs(v));
  scale = std::max(scale, 1e-6);

  double worst = 0.0;
  nlohmann::json where;
  std::vector<double> pts(mu.points().begin(), mu.points().end());
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t i = 0; i < d; ++i) {
      const double x = pts[p * d + i];
      const double h = rel_step * (1.0 + std::abs(x));
      pts[p * d + i] = x + h;
      const double up = functional.energy(ParticleEnsemble(n, d, pts));
      pts[p * d + i] = x - h;
      const double down = functional.energy(ParticleEnsemble(n, d, pts));
      pts[p * d + i] = x;
      const double fd = static_cast<double>(n) * (up - down) / (2.0 * h);
      const double err = std::abs(fd - g(p, i));
      if (!(err <= worst)) {
        worst = err;
        where = {{"particle", p}, {"coordinate", i}, {"finite_difference", fd}, {"gradient", g(p, i)}};
      }
    }
  }
  where["gradient_scale"] = scale;
  report.record(worst / scale, where);
  return report;
}

// ---------------------------------------------------------------------------
// Smoothness certificate

CheckReport smoothness_certificate(const EnergyFunctional& functional, const EnsembleSampler& sampler,
                                   const CertificateOptions& options, const Admissible& admissible) {
  CheckReport report("smoothness:" + functional.name(), options.slack);
  const SmoothnessProfile profile = functional.smoothness();
  const std::size_t d = functional.dim();
  Rng rng(splitmix64(options.seed ^ stream::kVerify));

  for (std::size_t draw = 0; draw < options.draws; ++draw) {
    const ParticleEnsemble mu = sampler(rng);
    const std::size_t n = mu.size();
    const std::size_t i = options.coordinate ? *options.coordinate
                                             : std::min(d - 1, static_cast<std::size_t>(rng.uniform() * d));
    std::vector<double> t(n);
    for (double& v : t) v = options.magnitude * rng.normal();

    ParticleEnsemble pushed = coordinate_pushforward(mu, i, t);
    int halvings = 0;
    if (admissible) {
      while (!admissible(pushed) && halvings < 60) {
        for (double& v : t) v *= 0.5;
        pushed = coordinate_pushforward(mu, i, t);
        ++halvings;
      }
      if (!admissible(pushed)) continue;
    }

    const double l_i = profile.total_coord(i);
    const GradientField g0 = functional.grad(mu);
    const GradientField g1 = functional.grad(pushed);
    double diff_sq = 0.0, t_sq = 0.0, inner = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      const double dg = g1(p, i) - g0(p, i);
      diff_sq += dg * dg;
      t_sq += t[p] * t[p];
      inner += g0(p, i) * t[p];
    }
    diff_sq /= static_cast<double>(n);
    t_sq /= static_cast<double>(n);
    inner /= static_cast<double>(n);

    const double lhs = std::sqrt(diff_sq);
    const double rhs = l_i * std::sqrt(t_sq);
    double lipschitz_excess = rhs > 0.0 ? lhs / rhs - 1.0 : -1.0;
    if (rhs == 0.0 && lhs > 0.0) lipschitz_excess = std::numeric_limits<double>::infinity();

    const double e0 = functional.energy(mu);
    const double e1 = functional.energy(pushed);
    const double quad = 0.5 * l_i * t_sq;
    // Rounding allowance for the energy difference.
    const double noise = 1e-14 * (std::abs(e0) + std::abs(e1) + std::abs(inner));
    const double excess = e1 - e0 - inner - quad - noise;
    // Signed relative excesses: negative values measure the slack in each bound.
    double descent_excess = quad > 0.0 ? excess / quad : 0.0;
    if (quad == 0.0 && excess > 0.0) descent_excess = std::numeric_limits<double>::infinity();

    report.record(std::max(lipschitz_excess, descent_excess),
                  {{"draw", draw},
                   {"coordinate", i},
                   {"L_i", l_i},
                   {"gradient_change", lhs},
                   {"lipschitz_bound", rhs},
                   {"energy_change", e1 - e0},
                   {"descent_bound", inner + quad},
                   {"halvings", halvings}});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Expected descent

CheckReport expected_descent_identity(const QuadraticPotential& functional, const ParticleEnsemble& mu,
                                      const Schedule& schedule, double tolerance) {
  CheckReport report("descent-identity", tolerance);
  const std::size_t n = mu.size(), d = mu.dim();
  const GradientField g = functional.grad(mu);
  const double e0 = functional.energy(mu);
  const double l_sum = functional.smoothness().coord_sum();

  double expected = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    if (schedule.probabilities[i] == 0.0) continue;
    std::vector<double> shift(n);
    for (std::size_t p = 0; p < n; ++p) shift[p] = -schedule.parameters[i] * g(p, i);
    expected += schedule.probabilities[i] * functional.energy(coordinate_pushforward(mu, i, shift));
  }
  const double predicted = e0 - mu_norm_sq(g) / (2.0 * l_sum);
  const double err = e0 == 0.0 ? std::abs(expected - predicted) : std::abs(expected - predicted) / std::abs(e0);
  report.record(err, {{"dimension", d}, {"energy", e0}, {"expected_energy", expected}, {"predicted", predicted}});
  return report;
}

// ---------------------------------------------------------------------------
// Subproblems

namespace {

// Evaluation-only objective: s g + eta/2 s^2 + V(x + s e_i).
struct ScalarObjective {
  const PotentialRegularizer& v;
  std::vector<double> x;
  std::size_t i;
  double g, eta;
  mutable std::vector<double> buf;

  double operator()(double s) const {
    buf = x;
    buf[i] += s;
    return s * g + 0.5 * eta * s * s + v.potential(buf);
  }
};

struct VectorObjective {
  const PotentialRegularizer& v;
  std::vector<double> x, g;
  double eta;
  mutable std::vector<double> buf;

  double operator()(const std::vector<double>& w) const {
    buf = x;
    double lin = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      buf[j] += w[j];
      lin += g[j] * w[j];
      sq += w[j] * w[j];
    }
    return lin + 0.5 * eta * sq + v.potential(buf);
  }
};

double grid_argmin(const ScalarObjective& f, double lo, double hi, int points) {
  double best = lo, best_val = std::numeric_limits<double>::infinity();
  for (int k = 0; k < points; ++k) {
    const double s = lo + (hi - lo) * k / (points - 1);
    const double val = f(s);
    if (val < best_val) {
      best_val = val;
      best = s;
    }
  }
  return best;
}

// Smallest value on a tensor grid of `points` per axis around `center`.
// Returns false when the argmin touched the window boundary.
bool tensor_grid_argmin(const VectorObjective& f, const std::vector<double>& center, double spacing, int half,
                        std::vector<double>& best) {
  const std::size_t d = center.size();
  std::vector<int> idx(d, -half);
  std::vector<int> best_idx(d, 0);
  std::vector<double> w(d);
  double best_val = std::numeric_limits<double>::infinity();
  while (true) {
    for (std::size_t j = 0; j < d; ++j) w[j] = center[j] + spacing * idx[j];
    const double val = f(w);
    if (val < best_val) {
      best_val = val;
      best = w;
      best_idx = idx;
    }
    std::size_t j = 0;
    while (j < d && ++idx[j] > half) idx[j++] = -half;
    if (j == d) break;
  }
  for (int k : best_idx)
    if (std::abs(k) == half) return false;
  return true;
}

}  // namespace

CheckReport scalar_subproblem_check(const PotentialRegularizer& regularizer, std::span<const double> x, std::size_t i,
                                    double gradient, double eta, int newton_iterations) {
  CheckReport report("subproblem-scalar", 1e-6);
  const auto line = regularizer.line(x, i);
  const double newton = solve_coordinate_subproblem(*line, gradient, eta, newton_iterations);

  const ScalarObjective f{regularizer, {x.begin(), x.end()}, i, gradient, eta, {}};
  // Strong convexity bounds |s*| by |psi'(0)| / eta; psi'(0) from a difference quotient.
  const double h = 1e-6;
  const double slope0 = (f(h) - f(-h)) / (2.0 * h);
  double radius = 2.0 * std::abs(slope0) / eta + 1e-3;
  double lo = -radius, hi = radius;
  double s = 0.0;
  for (int level = 0; level < 200; ++level) {
    s = grid_argmin(f, lo, hi, 2001);
    const double cell = (hi - lo) / 2000.0;
    if (s == lo || s == hi) {
      // Minimizer outside the bracket: widen and retry.
      const double width = hi - lo;
      lo = s - 2.0 * width;
      hi = s + 2.0 * width;
      continue;
    }
    if (cell < 1e-11 * (1.0 + std::abs(s))) break;
    lo = s - 2.0 * cell;
    hi = s + 2.0 * cell;
  }
  const double err = std::abs(newton - s) / (1.0 + std::abs(s));
  report.record(err, {{"coordinate", i}, {"gradient", gradient}, {"eta", eta}, {"newton", newton}, {"grid", s}});
  return report;
}

CheckReport vector_subproblem_check(const PotentialRegularizer& regularizer, std::span<const double> x,
                                    std::span<const double> gradient, double eta, int newton_iterations,
                                    double resolution) {
  CheckReport report("subproblem-vector", 2.0 * resolution);
  const std::size_t d = x.size();
  const std::vector<double> newton = solve_full_subproblem(regularizer, x, gradient, eta, newton_iterations);

  const VectorObjective f{regularizer, {x.begin(), x.end()}, {gradient.begin(), gradient.end()}, eta, {}};
  const double h = 1e-6;
  double slope_sq = 0.0;
  std::vector<double> e(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    e[j] = h;
    const double up = f(e);
    e[j] = -h;
    const double down = f(e);
    e[j] = 0.0;
    const double sl = (up - down) / (2.0 * h);
    slope_sq += sl * sl;
  }
  const double radius = 2.0 * std::sqrt(slope_sq) / eta + resolution;

  // Coarse grid over the box, then windows of +-4 cells at a tenth of the spacing.
  constexpr int kCoarseHalf = 20;
  constexpr int kFineHalf = 40;
  std::vector<double> center(d, 0.0), best(d, 0.0);
  double spacing = radius / kCoarseHalf;
  int half = kCoarseHalf;
  for (int guard = 0; guard < 200; ++guard) {
    const bool interior = tensor_grid_argmin(f, center, spacing, half, best);
    center = best;
    if (!interior) continue;  // recentre at the same spacing
    if (spacing <= resolution) break;
    spacing = std::max(spacing / 10.0, resolution);
    half = kFineHalf;
  }

  double err = 0.0;
  for (std::size_t j = 0; j < d; ++j) err = std::max(err, std::abs(newton[j] - center[j]));
  report.record(err, {{"eta", eta}, {"newton", newton}, {"grid", center}, {"gradient", f.g}, {"x", f.x}});
  return report;
}

// ---------------------------------------------------------------------------
// Standard instances

namespace {

Matrix random_psd(std::size_t d, Rng& rng, double ridge) {
  Matrix b(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index r = 0; r < b.rows(); ++r)
    for (Eigen::Index c = 0; c < b.cols(); ++c) b(r, c) = rng.normal();
  Matrix m = b.transpose() * b / static_cast<double>(d);
  m += ridge * Matrix::Identity(b.rows(), b.cols());
  return 0.5 * (m + m.transpose());
}

EnsembleSampler gaussian_sampler(std::size_t n, std::size_t d, double sigma, std::vector<double> mean = {}) {
  return [=](Rng& rng) { return sample_ensemble(IsotropicGaussian{mean, sigma}, n, d, rng); };
}

EnsembleSampler neuron_sampler(std::size_t n, std::size_t input_dim, const NnRegion& r) {
  const double f = 0.95;
  return [=](Rng& rng) {
    auto a = sample_ensemble(UniformBox{{-f * r.alpha_bound}, {f * r.alpha_bound}}, n, 1, rng);
    auto b = sample_ensemble(UniformBox{{-f * r.beta_bound}, {f * r.beta_bound}}, n, 1, rng);
    auto w = sample_ensemble(UniformBall{f * r.weight_bound}, n, input_dim, rng);
    auto c = sample_ensemble(UniformBox{{-f * r.bias_bound}, {f * r.bias_bound}}, n, 1, rng);
    return hstack({a, b, w, c});
  };
}

Admissible region_check(const std::shared_ptr<const TwoLayerNnEnergy>& nn) {
  return [nn](const ParticleEnsemble& mu) { return nn->in_region(mu); };
}

std::shared_ptr<TwoLayerNnEnergy> random_network(std::size_t k, std::size_t d, Rng& rng) {
  Matrix data(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
  std::vector<double> targets(k);
  for (std::size_t s = 0; s < k; ++s) {
    double z = 0.2;
    for (std::size_t j = 0; j < d; ++j) {
      data(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = rng.normal();
      z += data(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) / std::sqrt(static_cast<double>(d));
    }
    targets[s] = std::tanh(z) + 0.1;
  }
  return std::make_shared<TwoLayerNnEnergy>(std::move(data), std::move(targets), NnRegion{});
}

std::shared_ptr<SmoothedL1Potential> random_smoothed_l1(std::size_t d, double eps, Rng& rng) {
  std::vector<double> r(d);
  for (double& v : r) v = rng.uniform(0.2, 1.0);
  return smoothed_l1_potential(std::move(r), random_orthogonal(d, rng), eps);
}

}  // namespace

std::vector<VerifyCase> family_cases(bool small, std::uint64_t seed) {
  Rng rng(splitmix64(seed ^ stream::kVerify ^ 0x1234));
  const std::size_t d = small ? 4 : 10;
  const std::size_t n = small ? 8 : 30;
  std::vector<VerifyCase> cases;

  cases.push_back({"quadratic_potential", quadratic_potential(random_psd(d, rng, 0.1)), gaussian_sampler(n, d, 1.0), {}});
  cases.push_back(
      {"quadratic_interaction", quadratic_interaction(random_psd(d, rng, 0.1)), gaussian_sampler(n, d, 1.0), {}});

  {
    const std::size_t md = small ? 3 : 10;
    const std::size_t mn = small ? 5 : 30;
    auto target = sample_ensemble(IsotropicGaussian{{}, 1.0}, mn, md, rng);
    cases.push_back({"mmd", mmd_energy(std::move(target), log_spaced(1e-3, 1.0, md)),
                     gaussian_sampler(mn, md, 1.0, std::vector<double>(md, 0.3)), {}});
  }

  cases.push_back({"function_of_mean", function_of_mean(random_psd(d, rng, 0.1)), gaussian_sampler(n, d, 1.0), {}});
  cases.push_back({"smoothed_l1", random_smoothed_l1(d, 0.05, rng), gaussian_sampler(n, d, 0.5), {}});

  {
    const std::size_t k = small ? 5 : 50;
    const std::size_t nd = small ? 2 : 5;
    const std::size_t nn_n = small ? 3 : 20;
    auto net = random_network(k, nd, rng);
    cases.push_back({"two_layer_nn", net, neuron_sampler(nn_n, nd, net->region()), region_check(net)});
  }

  {
    auto g = quadratic_interaction(random_psd(d, rng, 0.1));
    auto reg = random_smoothed_l1(d, 0.05, rng);
    cases.push_back({"composite", composite(g, reg), gaussian_sampler(n, d, 0.5), {}});
  }
  return cases;
}

VerifyCase example_case(const std::string& name, bool small, std::uint64_t seed) {
  ExperimentSpec spec = default_spec(name);
  spec.seed = seed;
  spec.particles = small ? 10 : 50;
  if (small && name != "example1") spec.dimension = 5;
  if (small && name == "example3") spec.params.target_particles = 10;
  if (small && name == "example5") spec.params.data_samples = 50;
  const Problem problem = build_problem(spec);
  const std::size_t n = spec.particles;

  VerifyCase c{name, problem.functional, {}, {}, 0.5};
  if (name == "example5") {
    auto nn = std::dynamic_pointer_cast<const TwoLayerNnEnergy>(problem.functional);
    c.sampler = neuron_sampler(n, spec.dimension, nn->region());
    c.admissible = region_check(nn);
  } else {
    c.sampler = gaussian_sampler(n, problem.functional->dim(), 1.0);
  }
  return c;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"fd-grad", "smoothness", "descent-identity", "subproblem", "all"};
  return names;
}

namespace {

std::vector<VerifyCase> select_cases(bool small, const std::string& functional, std::uint64_t seed) {
  if (functional.rfind("example", 0) == 0) return {example_case(functional, small, seed)};
  std::vector<VerifyCase> all = family_cases(small, seed);
  if (functional.empty()) return all;
  std::vector<VerifyCase> out;
  for (auto& c : all)
    if (c.family == functional) out.push_back(std::move(c));
  if (out.empty()) throw ConfigError("unknown functional '" + functional + "'");
  return out;
}

CheckReport descent_identity_suite(std::uint64_t seed) {
  CheckReport total("descent-identity", 1e-9);
  Rng rng(splitmix64(seed ^ stream::kVerify ^ 0x5678));

  std::vector<std::shared_ptr<QuadraticPotential>> potentials;
  potentials.push_back(quadratic_potential(example1_matrix()));
  {
    Matrix p = Matrix::Zero(5, 5);
    for (int j = 0; j < 5; ++j) p(j, j) = rng.uniform(0.5, 20.0);
    potentials.push_back(quadratic_potential(p));
  }
  potentials.push_back(quadratic_potential(random_psd(20, rng, 0.05)));

  for (const auto& p : potentials) {
    const std::size_t d = p->dim();
    const Schedule s = schedule_from_profile(p->smoothness(), ScheduleMode::rwcd);
    total.merge(expected_descent_identity(*p, sample_ensemble(IsotropicGaussian{{}, 1.0}, 20, d, rng), s));
    total.merge(expected_descent_identity(*p, ParticleEnsemble(3, d, std::vector<double>(3 * d, 0.0)), s));
  }
  return total;
}

std::vector<CheckReport> subproblem_suite(bool small, std::uint64_t seed) {
  Rng rng(splitmix64(seed ^ stream::kVerify ^ 0x9abc));
  CheckReport scalar("subproblem-scalar", 1e-6);
  const int n_scalar = small ? 20 : 100;
  for (int k = 0; k < n_scalar; ++k) {
    const std::size_t d = 5;
    std::shared_ptr<SmoothedL1Potential> reg;
    if (k % 10 == 0) {
      reg = smoothed_l1_potential(std::vector<double>(d, 0.0), Matrix::Identity(5, 5), 0.1);
    } else {
      reg = random_smoothed_l1(d, rng.uniform(0.01, 0.5), rng);
    }
    std::vector<double> x(d);
    for (double& v : x) v = rng.normal();
    const auto i = std::min<std::size_t>(d - 1, static_cast<std::size_t>(rng.uniform() * d));
    scalar.merge(scalar_subproblem_check(*reg, x, i, 2.0 * rng.normal(), rng.uniform(0.5, 10.0)));
  }
  {
    // Example-4 regularizer on its stiffest coordinate.
    ExperimentSpec spec = default_spec("example4");
    spec.seed = seed;
    spec.particles = 1;
    const Problem problem = build_problem(spec);
    const auto& comp = dynamic_cast<const CompositeFunctional&>(*problem.functional);
    const auto& h = *comp.smoothness().reg_coord;
    const auto i = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
    const auto eta = comp.smoothness().prox_parameters()[i];
    for (int k = 0; k < (small ? 2 : 5); ++k) {
      std::vector<double> x(spec.dimension);
      for (double& v : x) v = 0.125 + 0.125 * rng.normal();
      scalar.merge(scalar_subproblem_check(comp.regularizer(), x, i, rng.normal() * 10.0, eta));
    }
  }

  CheckReport vec("subproblem-vector", 2e-3);
  const int n_vec = small ? 3 : 10;
  for (int k = 0; k < n_vec; ++k) {
    auto reg = random_smoothed_l1(3, rng.uniform(0.05, 0.5), rng);
    std::vector<double> x(3), g(3);
    for (double& v : x) v = 0.5 * rng.normal();
    for (double& v : g) v = rng.normal();
    vec.merge(vector_subproblem_check(*reg, x, g, rng.uniform(1.0, 5.0)));
  }
  return {scalar, vec};
}

}  // namespace

std::vector<CheckReport> run_suite(const std::string& suite, bool small, const std::string& functional,
                                   std::uint64_t seed) {
  std::vector<CheckReport> out;
  const bool all = suite == "all";
  if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end())
    throw ConfigError("unknown check suite '" + suite + "'");

  if (all || suite == "fd-grad") {
    Rng rng(splitmix64(seed ^ stream::kVerify ^ 0xdef0));
    for (const auto& c : select_cases(small, functional, seed)) {
      CheckReport r = fd_gradient_check(*c.functional, c.sampler(rng));
      r.name = "fd-grad:" + c.family;
      out.push_back(r);
    }
  }
  if (all || suite == "smoothness") {
    for (const auto& c : select_cases(small, functional, seed)) {
      CertificateOptions opt;
      opt.seed = seed;
      opt.magnitude = c.magnitude;
      CheckReport r = smoothness_certificate(*c.functional, c.sampler, opt, c.admissible);
      r.name = "smoothness:" + c.family;
      out.push_back(r);
    }
  }
  if (all || suite == "descent-identity") out.push_back(descent_identity_suite(seed));
  if (all || suite == "subproblem") {
    for (auto& r : subproblem_suite(small, seed)) out.push_back(r);
  }
  return out;
}

}  // namespace wcd
