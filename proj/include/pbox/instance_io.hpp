#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pbox/core_model.hpp"

namespace pbox {

/// Malformed instance or family description.
struct FormatError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

nlohmann::json cost_to_json(Cost c);
Cost cost_from_json(const nlohmann::json& j);

/// {"kind": "uniform", "n", "k"} | {"kind": "partition", "n", "parts", "capacities"}
/// | {"kind": "graphic", "vertices", "edges": [[a, b], ...]}
nlohmann::json matroid_to_json(const MatroidOracle& m);
MatroidOracle matroid_from_json(const nlohmann::json& j, int n);

/// {"kind": "select1"} | {"kind": "select-k", "k"} | {"kind": "matroid", "matroid": {...}}
nlohmann::json family_to_json(const ConstraintFamily& f);
ConstraintFamily family_from_json(const nlohmann::json& j, int n);

/// {n, T, scenarios: [[cost | "inf", ...], ...], metadata: {generator, seed, params},
/// family?}. Costs are normalized on load.
nlohmann::json instance_to_json(const ScenarioSequence& seq, const ConstraintFamily* family = nullptr);
ScenarioSequence instance_from_json(const nlohmann::json& j);
/// The family embedded in an instance, if any.
std::optional<ConstraintFamily> instance_family(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& p);
void write_instance_file(const std::filesystem::path& p, const ScenarioSequence& seq,
                         const ConstraintFamily* family = nullptr);

}  // namespace pbox
