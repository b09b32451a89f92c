#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wcd/ensemble.hpp"
#include "wcd/errors.hpp"
#include "wcd/functional.hpp"
#include "wcd/rng.hpp"

namespace wcd {

enum class Method { wgd, rwcd, wpg, rwcp };

std::string to_string(Method m);
Method parse_method(const std::string& name);
bool is_randomized(Method m);
bool is_proximal(Method m);

enum class ScheduleMode { rwcd, rwcp };

/// Coordinate sampling probabilities with per-coordinate step sizes
/// (1/L_i for rwcd) or proximal parameters (eta_i for rwcp).
struct Schedule {
  ScheduleMode mode = ScheduleMode::rwcd;
  std::vector<double> probabilities;
  std::vector<double> parameters;
  std::vector<double> cumulative;

  std::size_t dim() const { return probabilities.size(); }
  /// Inverse-CDF draw using one uniform variate.
  std::size_t sample(Rng& rng) const;
};

/// rwcd: p_i = L_i / L_sum, gamma_i = 1 / L_i (coordinates with L_i = 0 get p_i = 0).
/// rwcp: eta_i = L_i + sqrt(H_i^2 + L_i^2), p_i = eta_i / sum_j eta_j.
Schedule schedule_from_profile(const SmoothnessProfile& profile, ScheduleMode mode);

struct SolverStats {
  std::uint64_t newton_fallbacks = 0;
  std::uint64_t singular_systems = 0;
};

struct SolverConfig {
  Method method = Method::rwcd;
  std::uint64_t budget = 0;  // in work units
  std::optional<double> step;  // WGD step h or WPG parameter eta; defaults from the profile
  int newton_iterations = 20;
  std::uint64_t seed = 0;
  std::uint64_t trace_stride = 1;
  bool keep_coordinate_log = true;
};

struct TraceRecord {
  std::uint64_t work = 0;
  double energy = 0.0;
  double grad_norm_sq = 0.0;
  double running_min_grad_norm_sq = 0.0;
  double barycenter_norm = 0.0;
};

struct ConvergenceTrace {
  Method method = Method::rwcd;
  std::vector<TraceRecord> records;
  std::optional<ParticleEnsemble> final_ensemble;
  std::vector<std::uint32_t> coordinates;
  std::uint64_t steps = 0;
  SolverStats stats;
};

/// Raised when iterates blow up; carries everything recorded before the failure.
class SolverDivergence : public DivergenceError {
 public:
  SolverDivergence(const std::string& what, ConvergenceTrace partial)
      : DivergenceError(what), partial_(std::move(partial)) {}
  const ConvergenceTrace& partial() const { return partial_; }

 private:
  ConvergenceTrace partial_;
};

struct CoordinateStep {
  ParticleEnsemble ensemble;
  std::size_t coordinate;
};

/// Full Wasserstein gradient step x_n <- x_n - h grad(x_n). Costs d work units.
ParticleEnsemble wgd_step(const ParticleEnsemble& mu, const EnergyFunctional& functional, double h);

/// One random coordinate step along i ~ p with step gamma_i. Costs 1 work unit.
CoordinateStep rwcd_step(const ParticleEnsemble& mu, const EnergyFunctional& functional,
                         const Schedule& schedule, Rng& rng);

/// Full proximal-gradient step; each particle solves
/// min_v v.g_n + eta/2 |v|^2 + V(x_n + v) by Newton.
ParticleEnsemble wpg_step(const ParticleEnsemble& mu, const CompositeFunctional& functional, double eta,
                          int newton_iterations, SolverStats* stats = nullptr);

/// Random coordinate proximal-gradient step; each particle solves
/// min_s s g_n + eta_i/2 s^2 + V(x_n + s e_i) by scalar Newton.
CoordinateStep rwcp_step(const ParticleEnsemble& mu, const CompositeFunctional& functional,
                         const Schedule& schedule, Rng& rng, int newton_iterations,
                         SolverStats* stats = nullptr);

/// Minimizer of psi(s) = s g + eta/2 s^2 + line(s). Newton from s = 0 for
/// `iterations` steps, then bisection on psi' if the stationarity residual
/// exceeds 1e-8 (1 + eta |s|).
double solve_coordinate_subproblem(const CoordinateLine& line, double gradient, double eta, int iterations,
                                   SolverStats* stats = nullptr);

/// Minimizer of psi(v) = v.g + eta/2 |v|^2 + V(x + v).
std::vector<double> solve_full_subproblem(const PotentialRegularizer& regularizer, std::span<const double> x,
                                          std::span<const double> gradient, double eta, int iterations,
                                          SolverStats* stats = nullptr);

/// Default baseline step parameters: h = 1 / (L + H) for WGD and
/// eta = L + sqrt(H^2 + L^2) for WPG.
double default_wgd_step(const SmoothnessProfile& profile);
double default_wpg_parameter(const SmoothnessProfile& profile);

/// Iterates `config.method` from mu0 until the work budget is spent.
/// Records every `trace_stride` work units plus the initial and final states.
ConvergenceTrace run(const ParticleEnsemble& mu0, const EnergyFunctional& functional, const SolverConfig& config,
                     std::optional<Schedule> schedule = std::nullopt);

/// Energy growth beyond this factor of (1 + |E_0|) aborts a run.
inline constexpr double kDivergenceFactor = 1e6;

}  // namespace wcd
