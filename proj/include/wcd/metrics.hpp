#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wcd/functional.hpp"
#include "wcd/solvers.hpp"

namespace wcd {

/// Pointwise quantile band across trials on a shared work grid.
struct AggregateCurve {
  std::vector<std::uint64_t> work;
  std::vector<double> median;
  std::vector<double> p10;
  std::vector<double> p90;
  std::size_t n_trials = 0;
};

/// |grad_W E[mu]|_mu^2.
double grad_norm_sq(const ParticleEnsemble& mu, const EnergyFunctional& functional);

/// energy - e_star per record. Sets *warned when any gap is below -1e-8.
std::vector<double> energy_gap(const ConvergenceTrace& trace, double e_star, bool* warned = nullptr);

/// Running minimum, non-increasing by construction.
std::vector<double> running_min(const std::vector<double>& values);

/// Nearest-rank empirical quantile (rank ceil(q * n), 1-based) of unsorted values.
double nearest_rank_quantile(std::vector<double> values, double q);

using FieldSelector = std::function<double(const TraceRecord&)>;

namespace field {
double energy(const TraceRecord& r);
double grad_norm_sq(const TraceRecord& r);
double running_min_grad_norm_sq(const TraceRecord& r);
double barycenter_norm(const TraceRecord& r);
}  // namespace field

/// Aligns traces to the union of their work grids (last value carried
/// forward) and takes nearest-rank median / 10% / 90% quantiles.
AggregateCurve aggregate(const std::vector<ConvergenceTrace>& traces, const FieldSelector& select);

}  // namespace wcd
