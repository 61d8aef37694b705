#pragma once

#include "rnnid/experiments.hpp"

#include <json.hpp>

#include <string>

namespace rnnid {

using Json = nlohmann::json;

// Malformed input throws Error(ErrorCode::Config).

Json to_json(const ConvexPotential& potential);
ConvexPotential potential_from_json(const Json& j);

Json to_json(const InputModel& model);
InputModel input_model_from_json(const Json& j);

Json to_json(const SolverConfig& config);
SolverConfig solver_config_from_json(const Json& j);

Json to_json(const TheorySettings& settings);
TheorySettings theory_settings_from_json(const Json& j);

/// Unknown keys are rejected. "rho" is accepted as shorthand for a
/// leaky_relu potential when "potential" is absent.
Json to_json(const ExperimentConfig& config);
ExperimentConfig experiment_config_from_json(const Json& j);
ExperimentConfig load_experiment_config(const std::string& path);

Json to_json(const TheoryReport& report);

}  // namespace rnnid
