#pragma once

// GameSpec <-> JSON object {"goals": [...], "probs": [...]}. Omitted probs
// means canonical probabilities.

#include <json.hpp>

#include "mrace/model.hpp"

namespace mrace {

inline nlohmann::json to_json_value(const GameSpec& g) {
  return nlohmann::json{{"goals", g.goals}, {"probs", g.probs}};
}

inline GameSpec game_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("goals") || !j["goals"].is_array()) {
    throw ValidationError("game JSON must be an object with a \"goals\" array");
  }
  try {
    auto goals = j["goals"].get<std::vector<double>>();
    if (j.contains("probs") && !j["probs"].is_null()) {
      return game_from_goals_probs(std::move(goals), j["probs"].get<std::vector<double>>());
    }
    return game_from_goals(std::move(goals));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad game JSON: ") + e.what());
  }
}

}  // namespace mrace
