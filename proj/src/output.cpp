#include "wcd/output.hpp"

#include <cstdio>
#include <fstream>

#include "wcd/config.hpp"
#include "wcd/errors.hpp"
#include "wcd/rng.hpp"

namespace wcd {

namespace {

const char* const kFields[] = {"energy", "grad_norm_sq", "running_min_grad_norm_sq", "barycenter_norm"};

std::string trial_name(Method m, std::size_t t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_trial%03zu.csv", to_string(m).c_str(), t);
  return buf;
}

std::ofstream open(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace.records) {
    out << r.work << ',' << format_double(r.energy) << ',' << format_double(r.grad_norm_sq) << ','
        << format_double(r.running_min_grad_norm_sq) << ',' << format_double(r.barycenter_norm) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const MethodResult& result) {
  out << "work";
  for (const char* f : kFields) out << ',' << f << "_median," << f << "_p10," << f << "_p90";
  out << '\n';
  const auto& grid = result.aggregates.at("energy").work;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    out << grid[k];
    for (const char* f : kFields) {
      const AggregateCurve& c = result.aggregates.at(f);
      out << ',' << format_double(c.median[k]) << ',' << format_double(c.p10[k]) << ',' << format_double(c.p90[k]);
    }
    out << '\n';
  }
}

nlohmann::json summary_json(const ExperimentResult& result) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["spec"] = spec_to_json(result.spec);
  j["constants"] = constants_report(result.problem);
  j["wall_time_seconds"] = result.wall_seconds;
  j["complete"] = result.failures.empty();

  nlohmann::json seeds;
  seeds["experiment"] = result.spec.seed;
  seeds["problem_data"] = splitmix64(result.spec.seed ^ stream::kProblemData);
  seeds["initial_ensemble"] = splitmix64(result.spec.seed ^ stream::kInitialEnsemble);
  std::vector<std::uint64_t> trials;
  for (std::size_t t = 0; t < result.spec.trials; ++t) trials.push_back(trial_seed(result.spec.seed, t));
  seeds["trials"] = trials;
  j["seeds"] = seeds;

  nlohmann::json failures = nlohmann::json::array();
  for (const auto& f : result.failures)
    failures.push_back({{"method", to_string(f.method)}, {"trial", f.trial}, {"message", f.message}});
  j["failures"] = failures;

  nlohmann::json methods = nlohmann::json::object();
  for (const auto& m : result.methods) {
    nlohmann::json mj;
    mj["runs"] = m.traces.size();
    if (!is_randomized(m.method)) mj["step_parameter"] = m.step_parameter;
    std::uint64_t fallbacks = 0, singular = 0;
    for (const auto& t : m.traces) {
      fallbacks += t.stats.newton_fallbacks;
      singular += t.stats.singular_systems;
    }
    mj["newton_fallbacks"] = fallbacks;
    mj["singular_systems"] = singular;
    nlohmann::json fin;
    for (const char* f : kFields) {
      const AggregateCurve& c = m.aggregates.at(f);
      if (c.work.empty()) continue;
      fin[f] = {{"median", c.median.back()}, {"p10", c.p10.back()}, {"p90", c.p90.back()}};
    }
    const auto& grid = m.aggregates.at("energy").work;
    fin["work"] = grid.empty() ? 0 : grid.back();
    if (result.problem.e_star && !grid.empty())
      fin["energy_gap_median"] = m.aggregates.at("energy").median.back() - *result.problem.e_star;
    mj["final"] = fin;
    methods[to_string(m.method)] = mj;
  }
  j["methods"] = methods;
  return j;
}

std::vector<std::string> write_bundle(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());

  std::vector<std::string> written;
  for (const auto& m : result.methods) {
    if (is_randomized(m.method)) {
      for (std::size_t t = 0; t < m.traces.size(); ++t) {
        const std::string name = trial_name(m.method, t);
        auto out = open(dir / name);
        write_trace_csv(out, m.traces[t]);
        written.push_back(name);
      }
      const std::string name = to_string(m.method) + "_aggregate.csv";
      auto out = open(dir / name);
      write_aggregate_csv(out, m);
      written.push_back(name);
    } else {
      const std::string name = to_string(m.method) + ".csv";
      auto out = open(dir / name);
      write_trace_csv(out, m.traces.front());
      written.push_back(name);
    }
  }
  nlohmann::json summary = summary_json(result);
  summary["files"] = written;
  auto out = open(dir / "summary.json");
  out << summary.dump(2) << '\n';
  written.push_back("summary.json");
  return written;
}

}  // namespace wcd
