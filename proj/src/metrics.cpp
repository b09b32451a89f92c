#include "wcd/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wcd/errors.hpp"

namespace wcd {

double grad_norm_sq(const ParticleEnsemble& mu, const EnergyFunctional& functional) {
  return mu_norm_sq(functional.grad(mu));
}

std::vector<double> energy_gap(const ConvergenceTrace& trace, double e_star, bool* warned) {
  if (!std::isfinite(e_star)) throw ConfigError("reference minimum must be finite");
  std::vector<double> out;
  out.reserve(trace.records.size());
  bool negative = false;
  for (const auto& r : trace.records) {
    out.push_back(r.energy - e_star);
    if (out.back() < -1e-8) negative = true;
  }
  if (warned) *warned = negative;
  return out;
}

std::vector<double> running_min(const std::vector<double>& values) {
  std::vector<double> out(values.size());
  double current = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values.size(); ++k) {
    current = std::min(current, values[k]);
    out[k] = current;
  }
  return out;
}

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of no values");
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
  rank = std::clamp<std::size_t>(rank, 1, n);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(rank - 1), values.end());
  return values[rank - 1];
}

namespace field {
double energy(const TraceRecord& r) { return r.energy; }
double grad_norm_sq(const TraceRecord& r) { return r.grad_norm_sq; }
double running_min_grad_norm_sq(const TraceRecord& r) { return r.running_min_grad_norm_sq; }
double barycenter_norm(const TraceRecord& r) { return r.barycenter_norm; }
}  // namespace field

AggregateCurve aggregate(const std::vector<ConvergenceTrace>& traces, const FieldSelector& select) {
  if (traces.empty()) throw ConfigError("aggregate needs at least one trace");
  AggregateCurve curve;
  curve.n_trials = traces.size();
  for (const auto& t : traces) {
    if (t.records.empty()) throw ConfigError("aggregate got an empty trace");
    for (const auto& r : t.records) curve.work.push_back(r.work);
  }
  std::sort(curve.work.begin(), curve.work.end());
  curve.work.erase(std::unique(curve.work.begin(), curve.work.end()), curve.work.end());

  std::vector<std::size_t> cursor(traces.size(), 0);
  std::vector<double> column(traces.size());
  for (std::uint64_t w : curve.work) {
    for (std::size_t t = 0; t < traces.size(); ++t) {
      const auto& recs = traces[t].records;
      while (cursor[t] + 1 < recs.size() && recs[cursor[t] + 1].work <= w) ++cursor[t];
      column[t] = select(recs[cursor[t]]);
    }
    curve.median.push_back(nearest_rank_quantile(column, 0.5));
    curve.p10.push_back(nearest_rank_quantile(column, 0.1));
    curve.p90.push_back(nearest_rank_quantile(column, 0.9));
  }
  return curve;
}

}  // namespace wcd
