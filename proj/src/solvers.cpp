#include "wcd/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wcd/linalg.hpp"

namespace wcd {

std::string to_string(Method m) {
  switch (m) {
    case Method::wgd: return "wgd";
    case Method::rwcd: return "rwcd";
    case Method::wpg: return "wpg";
    case Method::rwcp: return "rwcp";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "wgd") return Method::wgd;
  if (name == "rwcd") return Method::rwcd;
  if (name == "wpg") return Method::wpg;
  if (name == "rwcp") return Method::rwcp;
  throw ConfigError("unknown method '" + name + "' (expected wgd, rwcd, wpg or rwcp)");
}

bool is_randomized(Method m) { return m == Method::rwcd || m == Method::rwcp; }
bool is_proximal(Method m) { return m == Method::wpg || m == Method::rwcp; }

// ---------------------------------------------------------------------------
// Schedules

std::size_t Schedule::sample(Rng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                           static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

Schedule schedule_from_profile(const SmoothnessProfile& profile, ScheduleMode mode) {
  const std::size_t d = profile.dim();
  if (d == 0) throw ConfigError("empty smoothness profile");
  Schedule s;
  s.mode = mode;
  std::vector<double> weights(d);
  if (mode == ScheduleMode::rwcd) {
    s.parameters.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      const double l = profile.total_coord(i);
      if (l < 0.0 || !std::isfinite(l)) throw ConfigError("coordinate smoothness constants must be finite and >= 0");
      weights[i] = l;
      if (l > 0.0) s.parameters[i] = 1.0 / l;
    }
  } else {
    s.parameters = profile.prox_parameters();
    weights = s.parameters;
  }
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw ConfigError("all coordinate constants are zero; no schedule exists");

  s.probabilities.resize(d);
  s.cumulative.resize(d);
  double running = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < d; ++i) {
    s.probabilities[i] = weights[i] / total;
    running += s.probabilities[i];
    s.cumulative[i] = running;
    if (weights[i] > 0.0) last_positive = i;
  }
  for (std::size_t i = last_positive; i < d; ++i) s.cumulative[i] = 1.0;
  return s;
}

// ---------------------------------------------------------------------------
// Subproblems

namespace {

bool coordinate_residual_ok(double residual, double eta, double s) {
  return std::isfinite(residual) && std::abs(residual) <= 1e-8 * (1.0 + eta * std::abs(s));
}

double bisect_coordinate(const CoordinateLine& line, double g, double eta) {
  auto slope = [&](double s) { return g + eta * s + line.at(s).slope; };
  double lo = -1.0, hi = 1.0;
  for (int k = 0; k < 200 && slope(lo) > 0.0; ++k) lo *= 2.0;
  for (int k = 0; k < 200 && slope(hi) < 0.0; ++k) hi *= 2.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (slope(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return std::abs(slope(lo)) <= std::abs(slope(hi)) ? lo : hi;
}

}  // namespace

double solve_coordinate_subproblem(const CoordinateLine& line, double gradient, double eta, int iterations,
                                   SolverStats* stats) {
  double s = 0.0;
  for (int it = 0; it < iterations; ++it) {
    const LinePoint p = line.at(s);
    const double slope = gradient + eta * s + p.slope;
    const double curvature = eta + p.curvature;
    if (slope == 0.0) break;
    s -= slope / curvature;
    if (!std::isfinite(s)) break;
  }
  if (std::isfinite(s) && coordinate_residual_ok(gradient + eta * s + line.at(s).slope, eta, s)) return s;
  if (stats) ++stats->newton_fallbacks;
  return bisect_coordinate(line, gradient, eta);
}

std::vector<double> solve_full_subproblem(const PotentialRegularizer& regularizer, std::span<const double> x,
                                          std::span<const double> gradient, double eta, int iterations,
                                          SolverStats* stats) {
  const std::size_t d = x.size();
  const auto di = static_cast<Eigen::Index>(d);
  const double fallback_rate = 1.0 / (eta + regularizer.smoothness().global);
  Vector v = Vector::Zero(di);
  std::vector<double> point(d), pot_grad(d);

  auto objective = [&](const Vector& trial) {
    double value = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      point[j] = x[j] + trial(static_cast<Eigen::Index>(j));
      value += trial(static_cast<Eigen::Index>(j)) * gradient[j];
    }
    return value + 0.5 * eta * trial.squaredNorm() + regularizer.potential(point);
  };
  auto objective_gradient = [&](const Vector& trial) {
    for (std::size_t j = 0; j < d; ++j) point[j] = x[j] + trial(static_cast<Eigen::Index>(j));
    regularizer.potential_gradient(point, pot_grad);
    Vector out(di);
    for (std::size_t j = 0; j < d; ++j) {
      out(static_cast<Eigen::Index>(j)) = gradient[j] + eta * trial(static_cast<Eigen::Index>(j)) + pot_grad[j];
    }
    return out;
  };
  auto residual_ok = [&](const Vector& trial) {
    return objective_gradient(trial).norm() <= 1e-8 * (1.0 + eta * trial.norm());
  };

  // Damped Newton: full step unless Armijo backtracking is needed.
  const int hard_cap = std::max(iterations, 200);
  int it = 0;
  bool counted_fallback = false;
  while (it < hard_cap) {
    if (it >= iterations) {
      if (residual_ok(v)) break;
      if (!counted_fallback && stats) ++stats->newton_fallbacks;
      counted_fallback = true;
    }
    ++it;
    const Vector grad = objective_gradient(v);
    if (grad.norm() == 0.0) break;
    for (std::size_t j = 0; j < d; ++j) point[j] = x[j] + v(static_cast<Eigen::Index>(j));
    Matrix hessian = regularizer.potential_hessian(point);
    hessian.diagonal().array() += eta;
    Eigen::LLT<Matrix> llt(hessian);
    Vector direction;
    if (llt.info() != Eigen::Success) {
      if (stats) ++stats->singular_systems;
      direction = -fallback_rate * grad;
    } else {
      direction = -llt.solve(grad);
    }
    const double current = objective(v);
    const double decrement = grad.dot(direction);
    if (!(decrement < 0.0)) break;
    double t = 1.0;
    bool accepted = false;
    while (t > 1e-12) {
      const Vector candidate = v + t * direction;
      if (objective(candidate) <= current + 1e-4 * t * decrement) {
        v = candidate;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;  // no representable decrease left
  }
  return std::vector<double>(v.data(), v.data() + d);
}

// ---------------------------------------------------------------------------
// Steps

ParticleEnsemble wgd_step(const ParticleEnsemble& mu, const EnergyFunctional& functional, double h) {
  if (!(h > 0.0)) throw ConfigError("WGD step size must be positive");
  const GradientField g = functional.grad(mu);
  DisplacementField t(mu.size(), mu.dim());
  for (std::size_t n = 0; n < mu.size(); ++n)
    for (std::size_t j = 0; j < mu.dim(); ++j) {
      const double v = g(n, j);
      if (!std::isfinite(v)) throw DivergenceError("non-finite Wasserstein gradient");
      t(n, j) = -h * v;
    }
  return pushforward(mu, t);
}

CoordinateStep rwcd_step(const ParticleEnsemble& mu, const EnergyFunctional& functional, const Schedule& schedule,
                         Rng& rng) {
  if (schedule.mode != ScheduleMode::rwcd) throw ConfigError("rwcd step needs an rwcd schedule");
  if (schedule.dim() != mu.dim()) throw DimensionError("schedule dimension does not match ensemble");
  const std::size_t i = schedule.sample(rng);
  std::vector<double> shift = functional.coord_grad(mu, i);
  const double gamma = schedule.parameters[i];
  for (double& s : shift) {
    if (!std::isfinite(s)) throw DivergenceError("non-finite coordinate gradient");
    s *= -gamma;
  }
  return {coordinate_pushforward(mu, i, shift), i};
}

ParticleEnsemble wpg_step(const ParticleEnsemble& mu, const CompositeFunctional& functional, double eta,
                          int newton_iterations, SolverStats* stats) {
  if (!(eta > 0.0)) throw ConfigError("WPG proximal parameter must be positive");
  const GradientField g = functional.smooth_part().grad(mu);
  DisplacementField t(mu.size(), mu.dim());
  for (std::size_t n = 0; n < mu.size(); ++n) {
    for (double v : g.row(n)) {
      if (!std::isfinite(v)) throw DivergenceError("non-finite Wasserstein gradient");
    }
    const auto v = solve_full_subproblem(functional.regularizer(), mu.row(n), g.row(n), eta, newton_iterations, stats);
    std::copy(v.begin(), v.end(), t.row(n).begin());
  }
  return pushforward(mu, t);
}

CoordinateStep rwcp_step(const ParticleEnsemble& mu, const CompositeFunctional& functional,
                         const Schedule& schedule, Rng& rng, int newton_iterations, SolverStats* stats) {
  if (schedule.mode != ScheduleMode::rwcp) throw ConfigError("rwcp step needs an rwcp schedule");
  if (schedule.dim() != mu.dim()) throw DimensionError("schedule dimension does not match ensemble");
  const std::size_t i = schedule.sample(rng);
  const double eta = schedule.parameters[i];
  const std::vector<double> g = functional.smooth_part().coord_grad(mu, i);
  std::vector<double> shift(mu.size());
  for (std::size_t n = 0; n < mu.size(); ++n) {
    if (!std::isfinite(g[n])) throw DivergenceError("non-finite coordinate gradient");
    const auto line = functional.regularizer().line(mu.row(n), i);
    shift[n] = solve_coordinate_subproblem(*line, g[n], eta, newton_iterations, stats);
  }
  return {coordinate_pushforward(mu, i, shift), i};
}

double default_wgd_step(const SmoothnessProfile& profile) {
  const double l = profile.global + profile.reg_global.value_or(0.0);
  if (!(l > 0.0)) throw ConfigError("global smoothness constant must be positive for the default WGD step");
  return 1.0 / l;
}

double default_wpg_parameter(const SmoothnessProfile& profile) {
  const double l = profile.global;
  const double h = profile.reg_global.value_or(0.0);
  const double eta = l + std::sqrt(h * h + l * l);
  if (!(eta > 0.0)) throw ConfigError("global constants must be positive for the default WPG parameter");
  return eta;
}

// ---------------------------------------------------------------------------
// Driver

namespace {

TraceRecord measure(const ParticleEnsemble& mu, const EnergyFunctional& functional, std::uint64_t work,
                    double previous_min) {
  TraceRecord r;
  r.work = work;
  r.energy = functional.energy(mu);
  r.grad_norm_sq = mu_norm_sq(functional.grad(mu));
  r.running_min_grad_norm_sq = std::min(previous_min, r.grad_norm_sq);
  double norm_sq = 0.0;
  for (double m : barycenter(mu)) norm_sq += m * m;
  r.barycenter_norm = std::sqrt(norm_sq);
  return r;
}

}  // namespace

ConvergenceTrace run(const ParticleEnsemble& mu0, const EnergyFunctional& functional, const SolverConfig& config,
                     std::optional<Schedule> schedule) {
  if (mu0.dim() != functional.dim()) throw DimensionError("initial ensemble does not match functional dimension");
  if (config.trace_stride == 0) throw ConfigError("trace stride must be positive");

  const CompositeFunctional* composite_functional = nullptr;
  if (is_proximal(config.method)) {
    composite_functional = dynamic_cast<const CompositeFunctional*>(&functional);
    if (!composite_functional) throw ConfigError(to_string(config.method) + " needs a composite functional");
  }
  const SmoothnessProfile profile = functional.smoothness();
  if (config.method == Method::rwcd || config.method == Method::rwcp) {
    const ScheduleMode mode = config.method == Method::rwcd ? ScheduleMode::rwcd : ScheduleMode::rwcp;
    if (!schedule) schedule = schedule_from_profile(profile, mode);
    if (schedule->mode != mode) throw ConfigError("schedule mode does not match method");
  } else if (schedule) {
    throw ConfigError("full-gradient methods take no coordinate schedule");
  }
  double step = 0.0;
  if (config.method == Method::wgd) step = config.step.value_or(default_wgd_step(profile));
  if (config.method == Method::wpg) step = config.step.value_or(default_wpg_parameter(profile));

  const std::uint64_t cost = is_randomized(config.method) ? 1 : mu0.dim();
  Rng rng(config.seed);

  ConvergenceTrace trace;
  trace.method = config.method;
  ParticleEnsemble mu = mu0;
  trace.records.push_back(measure(mu, functional, 0, std::numeric_limits<double>::infinity()));
  const double energy_limit = kDivergenceFactor * (1.0 + std::abs(trace.records.front().energy));

  std::uint64_t work = 0;
  std::uint64_t last_recorded = 0;
  try {
    while (work + cost <= config.budget) {
      switch (config.method) {
        case Method::wgd: mu = wgd_step(mu, functional, step); break;
        case Method::wpg: mu = wpg_step(mu, *composite_functional, step, config.newton_iterations, &trace.stats); break;
        case Method::rwcd: {
          auto r = rwcd_step(mu, functional, *schedule, rng);
          mu = std::move(r.ensemble);
          if (config.keep_coordinate_log) trace.coordinates.push_back(static_cast<std::uint32_t>(r.coordinate));
          break;
        }
        case Method::rwcp: {
          auto r = rwcp_step(mu, *composite_functional, *schedule, rng, config.newton_iterations, &trace.stats);
          mu = std::move(r.ensemble);
          if (config.keep_coordinate_log) trace.coordinates.push_back(static_cast<std::uint32_t>(r.coordinate));
          break;
        }
      }
      work += cost;
      ++trace.steps;
      const bool last = work + cost > config.budget;
      if (work - last_recorded >= config.trace_stride || last) {
        TraceRecord rec = measure(mu, functional, work, trace.records.back().running_min_grad_norm_sq);
        if (!std::isfinite(rec.energy) || rec.energy > energy_limit) {
          std::ostringstream msg;
          msg << to_string(config.method) << " diverged at work " << work << " (energy " << rec.energy << ")";
          trace.final_ensemble = mu;
          throw SolverDivergence(msg.str(), trace);
        }
        trace.records.push_back(rec);
        last_recorded = work;
      }
    }
  } catch (const SolverDivergence&) {
    throw;
  } catch (const DivergenceError& e) {
    throw SolverDivergence(e.what(), trace);
  } catch (const DimensionError& e) {
    // Shapes were checked up front, so this is an iterate that left the finite range.
    throw SolverDivergence(to_string(config.method) + " produced a non-finite iterate: " + e.what(), trace);
  }
  trace.final_ensemble = mu;
  return trace;
}

}  // namespace wcd
