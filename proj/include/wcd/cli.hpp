#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace wcd {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // a check suite ran and did not pass
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Name of the environment variable giving the default output directory.
inline constexpr const char* kOutputDirEnv = "WCD_OUTPUT_DIR";

struct RunOptions {
  std::string config;
  std::string out;  // empty: $WCD_OUTPUT_DIR, then "out"
  std::vector<std::string> overrides;
  unsigned threads = 1;
};

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_constants(const std::string& config, const std::vector<std::string>& overrides, std::ostream& out,
                  std::ostream& err);
int cmd_check(const std::string& suite, const std::string& scale, const std::string& functional, std::uint64_t seed,
              std::ostream& out, std::ostream& err);

/// Full command-line entry point (argument parsing included).
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wcd
