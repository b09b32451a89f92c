#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "wcd/harness.hpp"

namespace wcd {

inline constexpr const char* kTraceHeader = "work,energy,grad_norm_sq,running_min_grad_norm_sq,barycenter_norm";

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double x);

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);

/// One row per grid point with median/p10/p90 columns for each trace field.
void write_aggregate_csv(std::ostream& out, const MethodResult& result);

nlohmann::json summary_json(const ExperimentResult& result);

/// Writes <method>.csv for deterministic methods, <method>_trialNNN.csv and
/// <method>_aggregate.csv for randomized ones, and summary.json.
/// Returns the file names written, relative to `dir`.
std::vector<std::string> write_bundle(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace wcd
