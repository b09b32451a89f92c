#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "wcd/cli.hpp"

using namespace wcd;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  args.insert(args.begin(), "wcd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wcd_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string ci_config(int k) { return std::string(WCD_SOURCE_DIR) + "/configs/ci/example" + std::to_string(k) + ".yaml"; }

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = fs::temp_directory_path() / ("wcd_test_cli_" + name + ".yaml");
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("run writes the expected bundle") {
  const auto dir = scratch("bundle");
  const auto r = cli({"run", "--config", ci_config(2), "--out", dir.string(), "--set", "trials=2"});
  CHECK(r.code == kExitOk);
  for (const char* f : {"wgd.csv", "rwcd_trial000.csv", "rwcd_trial001.csv", "rwcd_aggregate.csv", "summary.json"})
    CHECK(fs::exists(dir / f));
  CHECK_FALSE(fs::exists(dir / "rwcd_trial002.csv"));

  std::istringstream trace(slurp(dir / "rwcd_trial000.csv"));
  std::string header;
  std::getline(trace, header);
  CHECK(header == "work,energy,grad_norm_sq,running_min_grad_norm_sq,barycenter_norm");

  const std::string text = slurp(dir / "summary.json");
  const auto j = nlohmann::json::parse(text);
  CHECK(j["spec"]["trials"] == 2);
  CHECK(j["complete"] == true);
  CHECK(j["seeds"]["trials"].size() == 2);
  CHECK(j["methods"]["rwcd"]["runs"] == 2);
  // Re-serializing the parsed summary reproduces the file byte for byte.
  CHECK(j.dump(2) + "\n" == text);
}

TEST_CASE("repeated --set flags all apply") {
  const auto dir = scratch("sets");
  const auto r = cli({"run", "--config", ci_config(1), "--out", dir.string(), "--set", "trials=1", "--set", "budget=20"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j["spec"]["trials"] == 1);
  CHECK(j["spec"]["budget"] == 20);
}

TEST_CASE("runs are byte-reproducible") {
  const auto a = scratch("rep_a"), b = scratch("rep_b");
  CHECK(cli({"run", "--config", ci_config(3), "--out", a.string(), "--threads", "1"}).code == 0);
  CHECK(cli({"run", "--config", ci_config(3), "--out", b.string(), "--threads", "2"}).code == 0);
  for (const auto& entry : fs::directory_iterator(a)) {
    if (entry.path().extension() != ".csv") continue;
    CAPTURE(entry.path().filename().string());
    CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
  }
}

TEST_CASE("output directory falls back to the environment") {
  const auto dir = scratch("env");
  ::setenv(kOutputDirEnv, dir.string().c_str(), 1);
  const auto r = cli({"run", "--config", ci_config(1), "--set", "trials=1"});
  ::unsetenv(kOutputDirEnv);
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(dir / "summary.json"));
}

TEST_CASE("exit codes") {
  CHECK(cli({"run", "--config", "/nonexistent.yaml"}).code == kExitConfig);
  CHECK(cli({"run"}).code == kExitConfig);
  CHECK(cli({"frobnicate"}).code == kExitConfig);
  CHECK(cli({"run", "--config", ci_config(1), "--set", "bogus=1"}).code == kExitConfig);
  CHECK(cli({"check", "nope"}).code == kExitConfig);
  CHECK(cli({"check", "fd-grad", "--scale", "medium"}).code == kExitConfig);

  const auto bad = write_config("bad", "schema_version: 1\nexperiment: example2\nparticles: 0\n");
  const auto r = cli({"run", "--config", bad.string()});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find(":3") != std::string::npos);

  // A deliberately oversized baseline step diverges: partial output and exit 3.
  const auto dir = scratch("diverge");
  const auto div = write_config("diverge", "schema_version: 1\nexperiment: example2\ndimension: 4\nparticles: 5\n"
                                           "trials: 1\nbudget: 400\nwgd_step: 1.0\n");
  const auto d = cli({"run", "--config", div.string(), "--out", dir.string()});
  CHECK(d.code == kExitRuntime);
  CHECK(fs::exists(dir / "wgd.csv"));
  const auto j = nlohmann::json::parse(slurp(dir / "summary.json"));
  CHECK(j["complete"] == false);
  CHECK(j["failures"].size() == 1);
}

TEST_CASE("constants and check subcommands") {
  const auto c = cli({"constants", "--config", ci_config(4)});
  CHECK(c.code == kExitOk);
  const auto j = nlohmann::json::parse(c.out);
  CHECK(j.contains("H_coord"));
  CHECK(j["rwcp"]["eta"].size() == 10);

  const auto k = cli({"check", "descent-identity"});
  CHECK(k.code == kExitOk);
  CHECK(nlohmann::json::parse(k.out)["passed"] == true);
  CHECK(cli({"--help"}).code == kExitOk);
}
