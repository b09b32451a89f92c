#include "wcd/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "wcd/errors.hpp"

namespace wcd {

namespace {

std::string where(const std::string& source, const YAML::Node& node) {
  const auto mark = node.Mark();
  if (mark.line < 0) return source;
  return source + ":" + std::to_string(mark.line + 1);
}

template <class T>
T as(const YAML::Node& node, const std::string& key, const std::string& source) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where(source, node) + ": bad value for '" + key + "'");
  }
}

template <class T>
T positive(const YAML::Node& node, const std::string& key, const std::string& source) {
  const T v = as<T>(node, key, source);
  if (!(v > T{0})) throw ConfigError(where(source, node) + ": '" + key + "' must be positive");
  return v;
}

std::size_t count(const YAML::Node& node, const std::string& key, const std::string& source) {
  const auto v = as<long long>(node, key, source);
  if (v <= 0) throw ConfigError(where(source, node) + ": '" + key + "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

std::uint64_t unsigned_value(const YAML::Node& node, const std::string& key, const std::string& source) {
  const auto v = as<long long>(node, key, source);
  if (v < 0) throw ConfigError(where(source, node) + ": '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(v);
}

using Setter = std::function<void(ExperimentSpec&, const YAML::Node&, const std::string&)>;

std::vector<std::vector<double>> matrix_value(const YAML::Node& node, const std::string& key,
                                              const std::string& source) {
  if (!node.IsSequence()) throw ConfigError(where(source, node) + ": '" + key + "' must be a list of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& row : node) rows.push_back(as<std::vector<double>>(row, key, source));
  return rows;
}

const std::map<std::string, Setter>& top_level_keys() {
  static const std::map<std::string, Setter> keys{
      {"schema_version", [](ExperimentSpec&, const YAML::Node&, const std::string&) {}},
      {"experiment", [](ExperimentSpec&, const YAML::Node&, const std::string&) {}},
      {"seed", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         s.seed = unsigned_value(n, "seed", src);
       }},
      {"particles", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         s.particles = count(n, "particles", src);
       }},
      {"dimension", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         s.dimension = count(n, "dimension", src);
       }},
      {"trials", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         s.trials = count(n, "trials", src);
       }},
      {"budget", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         s.budget = unsigned_value(n, "budget", src);
       }},
      {"trace_stride", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         s.trace_stride = count(n, "trace_stride", src);
       }},
      {"newton_iterations", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         s.newton_iterations = static_cast<int>(count(n, "newton_iterations", src));
       }},
      {"wgd_step", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         s.wgd_step = positive<double>(n, "wgd_step", src);
       }},
      {"wpg_eta", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         s.wpg_eta = positive<double>(n, "wpg_eta", src);
       }},
      {"methods", [](ExperimentSpec& s, const YAML::Node& n, const std::string& src) {
         std::vector<std::string> names = n.IsSequence() ? as<std::vector<std::string>>(n, "methods", src)
                                                         : std::vector<std::string>{as<std::string>(n, "methods", src)};
         s.methods.clear();
         for (const auto& name : names) {
           try {
             s.methods.push_back(parse_method(name));
           } catch (const ConfigError& e) {
             throw ConfigError(where(src, n) + ": " + e.what());
           }
         }
       }},
  };
  return keys;
}

#define WCD_REAL(field) \
  {#field, [](ProblemParams& p, const YAML::Node& n, const std::string& src) { p.field = as<double>(n, "params." #field, src); }}
#define WCD_COUNT(field) \
  {#field, [](ProblemParams& p, const YAML::Node& n, const std::string& src) { p.field = count(n, "params." #field, src); }}

using ParamSetter = std::function<void(ProblemParams&, const YAML::Node&, const std::string&)>;

const std::map<std::string, ParamSetter>& param_keys() {
  static const std::map<std::string, ParamSetter> keys{
      WCD_REAL(eig_min),       WCD_REAL(eig_max),        WCD_REAL(rate_min),     WCD_REAL(rate_max),
      WCD_COUNT(target_particles), WCD_REAL(init_shift), WCD_REAL(init_sigma),   WCD_REAL(q_min),
      WCD_REAL(q_max),         WCD_REAL(h_min),          WCD_REAL(h_max),        WCD_REAL(eps),
      WCD_REAL(mixing),        WCD_REAL(max_residual),   WCD_REAL(init_mean),    WCD_REAL(init_std),
      WCD_COUNT(data_samples), WCD_REAL(data_decay),     WCD_REAL(data_bound),   WCD_REAL(target_bias),
      WCD_REAL(target_offset), WCD_REAL(region_alpha),   WCD_REAL(region_beta),  WCD_REAL(region_weight),
      WCD_REAL(region_bias),   WCD_REAL(init_alpha),     WCD_REAL(init_beta),    WCD_REAL(init_weight),
      WCD_REAL(init_bias),     WCD_REAL(custom_init_sigma),
      {"potential", [](ProblemParams& p, const YAML::Node& n, const std::string& src) {
         p.potential = matrix_value(n, "params.potential", src);
       }},
      {"interaction", [](ProblemParams& p, const YAML::Node& n, const std::string& src) {
         p.interaction = matrix_value(n, "params.interaction", src);
       }},
  };
  return keys;
}

#undef WCD_REAL
#undef WCD_COUNT

bool known_key(const std::string& dotted) {
  const auto dot = dotted.find('.');
  if (dot == std::string::npos) return dotted != "params" && top_level_keys().count(dotted) > 0;
  return dotted.substr(0, dot) == "params" && param_keys().count(dotted.substr(dot + 1)) > 0;
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + assignment + ": expected key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  if (!known_key(key)) throw ConfigError("--set " + assignment + ": unknown key '" + key + "'");
  YAML::Node value;
  try {
    value = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError("--set " + assignment + ": " + e.msg);
  }
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    root[key] = value;
    return;
  }
  if (!root["params"]) root["params"] = YAML::Node(YAML::NodeType::Map);
  YAML::Node params = root["params"];
  if (!params.IsMap()) throw ConfigError("'params' must be a mapping");
  params[key.substr(dot + 1)] = value;
}

}  // namespace

ExperimentSpec parse_config(const std::string& text, const std::vector<std::string>& overrides,
                            const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError(source + ": top level must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);

  if (!root["schema_version"]) throw ConfigError(source + ": missing 'schema_version'");
  const int version = as<int>(root["schema_version"], "schema_version", source);
  if (version != kSchemaVersion)
    throw ConfigError(where(source, root["schema_version"]) + ": unsupported schema_version " +
                      std::to_string(version) + " (expected " + std::to_string(kSchemaVersion) + ")");
  if (!root["experiment"]) throw ConfigError(source + ": missing 'experiment'");
  const auto name = as<std::string>(root["experiment"], "experiment", source);

  ExperimentSpec spec;
  try {
    spec = default_spec(name);
  } catch (const ConfigError& e) {
    throw ConfigError(where(source, root["experiment"]) + ": " + e.what());
  }

  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    if (key == "params") {
      if (!kv.second.IsMap()) throw ConfigError(where(source, kv.second) + ": 'params' must be a mapping");
      for (const auto& pkv : kv.second) {
        const auto pkey = pkv.first.as<std::string>();
        const auto it = param_keys().find(pkey);
        if (it == param_keys().end())
          throw ConfigError(where(source, pkv.first) + ": unknown key 'params." + pkey + "'");
        it->second(spec.params, pkv.second, source);
      }
      continue;
    }
    const auto it = top_level_keys().find(key);
    if (it == top_level_keys().end()) throw ConfigError(where(source, kv.first) + ": unknown key '" + key + "'");
    it->second(spec, kv.second, source);
  }

  try {
    spec.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return spec;
}

ExperimentSpec load_config(const std::string& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), overrides, path);
}

nlohmann::json spec_to_json(const ExperimentSpec& s) {
  nlohmann::json j;
  j["schema_version"] = kSchemaVersion;
  j["experiment"] = s.name;
  j["dimension"] = s.dimension;
  j["particles"] = s.particles;
  j["trials"] = s.trials;
  j["budget"] = s.budget;
  j["seed"] = s.seed;
  j["trace_stride"] = s.trace_stride;
  j["newton_iterations"] = s.newton_iterations;
  std::vector<std::string> methods;
  for (Method m : s.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  if (s.wgd_step) j["wgd_step"] = *s.wgd_step;
  if (s.wpg_eta) j["wpg_eta"] = *s.wpg_eta;

  const ProblemParams& p = s.params;
  nlohmann::json params;
  if (s.name == "example2") {
    params = {{"eig_min", p.eig_min}, {"eig_max", p.eig_max}};
  } else if (s.name == "example3") {
    params = {{"rate_min", p.rate_min},
              {"rate_max", p.rate_max},
              {"target_particles", p.target_particles},
              {"init_shift", p.init_shift},
              {"init_sigma", p.init_sigma}};
  } else if (s.name == "example4") {
    params = {{"q_min", p.q_min},           {"q_max", p.q_max},       {"h_min", p.h_min},
              {"h_max", p.h_max},           {"eps", p.eps},           {"mixing", p.mixing},
              {"max_residual", p.max_residual}, {"init_mean", p.init_mean}, {"init_std", p.init_std}};
  } else if (s.name == "example5") {
    params = {{"data_samples", p.data_samples}, {"data_decay", p.data_decay},   {"data_bound", p.data_bound},
              {"target_bias", p.target_bias},   {"target_offset", p.target_offset}, {"region_alpha", p.region_alpha},
              {"region_beta", p.region_beta},   {"region_weight", p.region_weight}, {"region_bias", p.region_bias},
              {"init_alpha", p.init_alpha},     {"init_beta", p.init_beta},     {"init_weight", p.init_weight},
              {"init_bias", p.init_bias}};
  } else if (s.name == "custom") {
    params = {{"potential", p.potential}, {"interaction", p.interaction}, {"custom_init_sigma", p.custom_init_sigma}};
  } else {
    params = nlohmann::json::object();
  }
  j["params"] = params;
  return j;
}

}  // namespace wcd
