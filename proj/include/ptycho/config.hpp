#pragma once

#include <json.hpp>

#include "ptycho/reconstruct.hpp"
#include "ptycho/simulator.hpp"

namespace ptycho {

struct ReconstructToolConfig {
  ReconstructOptions options;
  int checkpoint_interval = 50;
};

/// Strict parsers: unknown keys are rejected so silent typos cannot change a
/// run. The *_to_json functions produce the resolved config written next to
/// every tool output.
SimulationRecipe parse_recipe(const nlohmann::json& j);
ReconstructToolConfig parse_reconstruct_config(const nlohmann::json& j);

nlohmann::json recipe_to_json(const SimulationRecipe& r);
nlohmann::json reconstruct_config_to_json(const ReconstructToolConfig& c);

}  // namespace ptycho
