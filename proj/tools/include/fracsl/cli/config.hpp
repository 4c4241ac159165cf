#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracsl/forward.hpp"
#include "fracsl/potential.hpp"

namespace fracsl::cli {

using nlohmann::json;

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"eigensolve", "forward",     "kernel",      "weyl-scan", "counting",
                                                 "region-map", "reconstruct", "distinguish", "verify-all"};
  return names;
}

struct SchemaError {
  std::string path;
  std::string message;
};

/// Empty iff the text parses and satisfies the per-command schema.
std::vector<SchemaError> validate(const std::string& config_text);

/// JSON Schema (draft 2020-12) describing every command's parameters.
json published_schema();

struct ExperimentConfig {
  std::string command;
  json parameters;  ///< validated, with defaults filled in
  std::string output_dir;
  std::uint64_t seed = 0;
};

/// Parses and validates; throws ConfigError listing every schema error.
ExperimentConfig parse_config(const std::string& config_text);

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<SchemaError> errors);
  const std::vector<SchemaError>& errors() const noexcept { return errors_; }

 private:
  std::vector<SchemaError> errors_;
};

PotentialSpec build_potential(const json& spec);
fwd::DriveSignal build_drive(const json& spec);

}  // namespace fracsl::cli
