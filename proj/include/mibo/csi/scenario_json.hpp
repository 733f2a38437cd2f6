#pragma once

#include "json.hpp"

#include "mibo/csi/scenario.hpp"

namespace mibo::csi {

nlohmann::json scenario_to_json(const SimScenario& scenario);

// Starts from `base` and overrides the keys present in `j`. Unknown keys are
// rejected with std::invalid_argument naming the key.
SimScenario scenario_from_json(const nlohmann::json& j, const SimScenario& base = {});

}  // namespace mibo::csi
