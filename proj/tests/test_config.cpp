#include <string>

#include "doctest.h"
#include "wcd/config.hpp"
#include "wcd/errors.hpp"

using namespace wcd;

namespace {

std::string error_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    parse_config(text, overrides, "cfg.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

const char* kBase = "schema_version: 1\nexperiment: example2\n";

}  // namespace

TEST_CASE("minimal config takes the experiment defaults") {
  const auto s = parse_config(kBase);
  const auto d = default_spec("example2");
  CHECK(s.name == "example2");
  CHECK(s.dimension == d.dimension);
  CHECK(s.particles == d.particles);
  CHECK(s.budget == d.budget);
  CHECK(s.methods == d.methods);
  CHECK(spec_to_json(s) == spec_to_json(d));
}

TEST_CASE("every field can be set") {
  const auto s = parse_config(std::string(kBase) +
                              "seed: 9\nparticles: 12\ndimension: 7\ntrials: 3\nbudget: 500\ntrace_stride: 4\n"
                              "newton_iterations: 30\nwgd_step: 0.001\nmethods: [rwcd]\n"
                              "params:\n  eig_min: 2\n  eig_max: 50\n");
  CHECK(s.seed == 9);
  CHECK(s.particles == 12);
  CHECK(s.dimension == 7);
  CHECK(s.trials == 3);
  CHECK(s.budget == 500);
  CHECK(s.trace_stride == 4);
  CHECK(s.newton_iterations == 30);
  CHECK(s.wgd_step == 0.001);
  CHECK(s.methods == std::vector<Method>{Method::rwcd});
  CHECK(s.params.eig_min == 2.0);
  CHECK(s.params.eig_max == 50.0);
}

TEST_CASE("unknown keys are reported with their line") {
  const auto e = error_of(std::string(kBase) + "seed: 1\nparticle: 5\n");
  CHECK(contains(e, "cfg.yaml:4"));
  CHECK(contains(e, "particle"));
  const auto p = error_of(std::string(kBase) + "params:\n  eig_mni: 1\n");
  CHECK(contains(p, "cfg.yaml:4"));
  CHECK(contains(p, "params.eig_mni"));
}

TEST_CASE("bad values name their line") {
  CHECK(contains(error_of(std::string(kBase) + "particles: -3\n"), "cfg.yaml:3"));
  CHECK(contains(error_of(std::string(kBase) + "particles: many\n"), "cfg.yaml:3"));
  CHECK(contains(error_of(std::string(kBase) + "methods: [rwcd, adam]\n"), "cfg.yaml:3"));
  CHECK(contains(error_of(std::string(kBase) + "wgd_step: 0\n"), "wgd_step"));
  CHECK(contains(error_of("schema_version: 1\nexperiment: example7\n"), "cfg.yaml:2"));
  CHECK(contains(error_of("schema_version: 1\nexperiment: example1\ndimension: 3\n"), "two-dimensional"));
  CHECK_FALSE(error_of("schema_version: 1\nexperiment: [unterminated\n").empty());
}

TEST_CASE("schema version is required and checked") {
  CHECK(contains(error_of("experiment: example2\n"), "schema_version"));
  const auto e = error_of("schema_version: 2\nexperiment: example2\n");
  CHECK(contains(e, "unsupported"));
  CHECK(contains(e, "cfg.yaml:1"));
  CHECK(contains(error_of("schema_version: 1\n"), "experiment"));
}

TEST_CASE("overrides") {
  const auto s = parse_config(std::string(kBase) + "trials: 10\n", {"trials=1", "params.eig_max=20", "methods=[wgd]"});
  CHECK(s.trials == 1);
  CHECK(s.params.eig_max == 20.0);
  CHECK(s.methods == std::vector<Method>{Method::wgd});
  CHECK(contains(error_of(kBase, {"trails=1"}), "unknown key 'trails'"));
  CHECK(contains(error_of(kBase, {"trials"}), "key=value"));
  CHECK(contains(error_of(kBase, {"params.nope=1"}), "params.nope"));
  CHECK_FALSE(error_of(kBase, {"trials=0"}).empty());
  // Matrix params accept flow sequences.
  const auto c = parse_config("schema_version: 1\nexperiment: custom\n", {"params.potential=[[1, 0], [0, 2]]"});
  CHECK(c.params.potential == std::vector<std::vector<double>>{{1.0, 0.0}, {0.0, 2.0}});
}

TEST_CASE("shipped configs parse") {
  for (const char* dir : {"/configs/", "/configs/ci/"})
    for (int k = 1; k <= 5; ++k) {
      const auto path = std::string(WCD_SOURCE_DIR) + dir + "example" + std::to_string(k) + ".yaml";
      CAPTURE(path);
      CHECK_NOTHROW(load_config(path));
    }
  CHECK_THROWS_AS(load_config("/nonexistent/x.yaml"), ConfigError);
}
