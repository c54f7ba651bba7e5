#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "smmc/controllers.hpp"
#include "smmc/simulation.hpp"

namespace smmc {

/// Fully resolved run configuration. Controller settings are resolved per
/// mode so that a comparison runs each law with its own switching element.
struct RunConfig {
  Scenario scenario;  // scenario.controller is the config of the `run` mode
  std::map<ControllerMode, ControllerConfig> controllers;
  std::vector<ControllerMode> compare_controllers{ControllerMode::kSmc1, ControllerMode::kSmc2,
                                                  ControllerMode::kSmmc};
  std::string output_dir = "out";

  /// The shared scenario driven by the controller configured for `mode`.
  Scenario scenario_for(ControllerMode mode) const;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates a JSON run configuration. Unknown keys are rejected.
/// Throws ParseError (with line and column) for malformed text and
/// ValidationError naming the violated invariant otherwise.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Pretty-printed JSON with every default resolved; parse_config of the
/// result yields an equal RunConfig.
std::string serialize_config(const RunConfig& config);

}  // namespace smmc
