#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace hdyn {

/// One documented configuration key. `path` is dotted ("data.keep").
struct ConfigKey {
  std::string path;
  std::string unit;
  nlohmann::json default_value;
  std::string help;
};

/// Every key the harness understands, grouped by section.
const std::vector<ConfigKey>& config_schema();

/// Nested object holding every default.
nlohmann::json default_config();

/// Sections a subcommand reads ("robot", "plant", "data", ...).
std::vector<std::string> subcommand_sections(const std::string& subcommand);
const std::vector<std::string>& subcommand_names();
std::string subcommand_summary(const std::string& subcommand);

/// Key table for the given sections: path, unit, default, description.
std::string format_schema(const std::vector<std::string>& sections);

/// Defaults, then the file (if any), then each "a.b=value" override. Values
/// parse as JSON when they can and as plain strings otherwise. Unknown keys
/// and type changes raise ConfigError.
nlohmann::json load_config(const std::string& file, const std::vector<std::string>& overrides);

/// Value at a dotted path; ConfigError when missing.
const nlohmann::json& config_at(const nlohmann::json& config, const std::string& path);

}  // namespace hdyn
