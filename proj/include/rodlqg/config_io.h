#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rodlqg/rod_config.h"
#include "rodlqg/simulator.h"

namespace rodlqg {

/// The optional "sim" section of a config file.
struct SimSection {
  SimConfig sim;
  /// Unset means: estimate when sensors exist, otherwise state feedback.
  std::optional<FeedbackSource> feedback;
  /// Decay-rate fit window; defaults to [T/10, T].
  std::optional<std::array<double, 2>> window;
};

struct LoadedConfig {
  RodConfig rod;
  SimSection sim;
};

/// Parses and validates a JSON problem description. `overrides` are
/// "key=value" strings applied after parsing and before validation; keys
/// use dotted paths with [i] indices ("q", "sim.dt", "actuators[1].beta").
/// Errors are ValidationError messages of the form
/// "<source>:<line>: <field>: <reason>".
LoadedConfig ParseConfig(std::string_view text, const std::string& source,
                         const std::vector<std::string>& overrides = {});

LoadedConfig LoadConfig(const std::string& path,
                        const std::vector<std::string>& overrides = {});

/// The bundled examples as config documents.
std::string ExampleConfigJson(int id);

}  // namespace rodlqg
