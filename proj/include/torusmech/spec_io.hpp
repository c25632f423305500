#pragma once

#include "torusmech/model.hpp"

#include <json.hpp>

#include <string>

namespace torusmech {

/// A loaded system: configuration torus plus potential.
struct SystemSpec {
  TorusModel model;
  TrigPotential potential;
};

/// Parses the system specification schema:
///   { "dimension": 2,
///     "metric": {"diag": [1.0, 1.0]} | {"full": [[...],[...]]},
///     "potential": [ {"amplitude": 1.0, "wave": [1,0], "kind": "cos"}, ... ] }
/// Unknown keys are rejected; dimension consistency is validated.
SystemSpec parse_system(const nlohmann::json& j);

SystemSpec load_system(const std::string& path);

nlohmann::json system_to_json(const SystemSpec& spec);

/// The paper's staple system on T^n: U = sum_i cos(k_i x_i) with the
/// euclidean metric. `waves` holds one k_i >= 1 per axis.
SystemSpec example3_system(int dimension, const std::vector<int>& waves);

}  // namespace torusmech
