#include "wcd/cli.hpp"

#include <cstdlib>
#include <exception>

#include "CLI11.hpp"
#include "json.hpp"

#include "wcd/config.hpp"
#include "wcd/errors.hpp"
#include "wcd/harness.hpp"
#include "wcd/output.hpp"
#include "wcd/verify.hpp"

namespace wcd {

namespace {

std::string output_directory(const std::string& requested) {
  if (!requested.empty()) return requested;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return "out";
}

}  // namespace

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  ExperimentSpec spec;
  try {
    spec = load_config(options.config, options.overrides);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  const std::string dir = output_directory(options.out);
  try {
    const ExperimentResult result = run_experiment(spec, options.threads);
    const auto files = write_bundle(result, dir);
    out << "wrote " << files.size() << " files to " << dir << " (" << result.wall_seconds << " s)\n";
    if (!result.failures.empty()) {
      err << result.failures.size() << " run(s) diverged; partial traces written, see summary.json\n";
      for (const auto& f : result.failures)
        err << "  " << to_string(f.method) << " trial " << f.trial << ": " << f.message << '\n';
      return kExitRuntime;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_constants(const std::string& config, const std::vector<std::string>& overrides, std::ostream& out,
                  std::ostream& err) {
  try {
    const ExperimentSpec spec = load_config(config, overrides);
    out << constants_report(build_problem(spec)).dump(2) << '\n';
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int cmd_check(const std::string& suite, const std::string& scale, const std::string& functional, std::uint64_t seed,
              std::ostream& out, std::ostream& err) {
  if (scale != "small" && scale != "full") {
    err << "config error: --scale must be small or full\n";
    return kExitConfig;
  }
  std::vector<CheckReport> reports;
  try {
    reports = run_suite(suite, scale == "small", functional, seed);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  bool ok = true;
  nlohmann::json j;
  j["suite"] = suite;
  j["scale"] = scale;
  j["reports"] = nlohmann::json::array();
  for (const auto& r : reports) {
    ok = ok && r.passed;
    j["reports"].push_back(r.to_json());
  }
  j["passed"] = ok;
  out << j.dump(2) << '\n';
  return ok ? kExitOk : kExitFailure;
}

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Randomized Wasserstein coordinate descent toolkit"};
  app.require_subcommand(1);

  RunOptions run_opts;
  auto* run = app.add_subcommand("run", "run an experiment and write traces");
  run->add_option("--config", run_opts.config, "experiment config (YAML)")->required();
  run->add_option("--out", run_opts.out, std::string("output directory (default $") + kOutputDirEnv + " or ./out)");
  run->add_option("--set", run_opts.overrides, "override a config key, e.g. --set trials=1")->take_all();
  run->add_option("--threads", run_opts.threads, "worker threads for trials")->check(CLI::PositiveNumber);

  std::string const_config;
  std::vector<std::string> const_overrides;
  auto* constants = app.add_subcommand("constants", "print smoothness constants and schedules");
  constants->add_option("--config", const_config, "experiment config (YAML)")->required();
  constants->add_option("--set", const_overrides, "override a config key")->take_all();

  std::string suite, scale = "small", functional;
  std::uint64_t seed = 0;
  auto* check = app.add_subcommand("check", "run a verification suite");
  check->add_option("suite", suite, "fd-grad | smoothness | descent-identity | subproblem | all")->required();
  check->add_option("--scale", scale, "small or full");
  check->add_option("--functional", functional, "family name or exampleK");
  check->add_option("--seed", seed, "seed for random instances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(run_opts, out, err);
  if (*constants) return cmd_constants(const_config, const_overrides, out, err);
  return cmd_check(suite, scale, functional, seed, out, err);
}

}  // namespace wcd
