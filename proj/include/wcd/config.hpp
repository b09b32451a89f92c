#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "wcd/harness.hpp"

namespace wcd {

inline constexpr int kSchemaVersion = 1;

/// Parses a YAML experiment config. `overrides` are `dotted.key=value`
/// strings applied before validation; values are read as YAML scalars or
/// flow sequences. Unknown keys, bad values and a missing or unsupported
/// schema_version raise ConfigError naming the line or override.
ExperimentSpec parse_config(const std::string& text, const std::vector<std::string>& overrides = {},
                            const std::string& source = "<config>");
ExperimentSpec load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Every spec field, including defaults that were not written in the file.
nlohmann::json spec_to_json(const ExperimentSpec& spec);

}  // namespace wcd
