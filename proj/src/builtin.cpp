#include <stdexcept>

#include "valence/scenario_io.hpp"

namespace valence {

namespace {

constexpr std::string_view kFirefight = R"json({
  "format_version": 1,
  "name": "firefight",
  "description": "Single firefighter at a residential fire with trapped occupants.",
  "variables": [
    {"name": "fire", "levels": ["None", "Low", "Moderate", "High", "Severe"]},
    {"name": "occupancy", "levels": ["0", "1", "2", "3", "4"]},
    {"name": "equipment", "levels": ["NotReady", "Ready"]},
    {"name": "knowledge", "levels": ["Poor", "Good"]},
    {"name": "health", "levels": ["Incapacitated", "ModeratelyInjured", "SlightlyInjured", "Perfect"]}
  ],
  "initial_state": {"fire": "Moderate", "occupancy": "4", "equipment": "NotReady", "knowledge": "Poor", "health": "Perfect"},
  "actions": [
    {"name": "EvacuateOccupants", "effects": [
      {"assign": [{"variable": "occupancy", "decrement": 1}]},
      {"when": "knowledge == Poor or equipment == NotReady", "assign": [{"variable": "health", "decrement": 1}]},
      {"when": "fire >= Moderate", "assign": [{"variable": "health", "decrement": 1}]},
      {"when": "fire == Severe", "assign": [{"variable": "equipment", "set": "NotReady"}]}
    ]},
    {"name": "ContainFire", "effects": [
      {"assign": [{"variable": "fire", "decrement": 1}]}
    ]},
    {"name": "AggressiveFireSuppression", "effects": [
      {"assign": [{"variable": "fire", "decrement": 2}]},
      {"when": "knowledge == Poor or equipment == NotReady", "assign": [{"variable": "health", "decrement": 1}]},
      {"when": "fire >= Moderate", "assign": [{"variable": "health", "decrement": 1}]},
      {"when": "fire == Severe", "assign": [{"variable": "equipment", "set": "NotReady"}]}
    ]},
    {"name": "PrepareEquipment", "effects": [
      {"assign": [{"variable": "equipment", "set": "Ready"}]}
    ]},
    {"name": "UpdateKnowledge", "effects": [
      {"assign": [{"variable": "knowledge", "set": "Good"}]}
    ]}
  ],
  "values": [
    {"name": "Professionalism", "rules": {
      "EvacuateOccupants": {"cases": [
        {"when": "occupancy == 0", "score": -1},
        {"score": "1 - 0.5 * (fire / 4) - 0.5 * (1 - knowledge)"}
      ]},
      "ContainFire": {"cases": [{"when": "fire == None", "score": -1}], "default": 0.8},
      "AggressiveFireSuppression": {"cases": [
        {"when": "fire == None", "score": -1},
        {"when": "equipment == NotReady", "score": 0.3}
      ], "default": 0.6},
      "PrepareEquipment": {"cases": [{"when": "equipment == Ready", "score": -1}], "default": 0.5},
      "UpdateKnowledge": {"cases": [{"when": "knowledge == Good", "score": -1}], "default": 1}
    }},
    {"name": "Proximity", "rules": {
      "EvacuateOccupants": {"cases": [{"when": "occupancy == 0", "score": -1}], "default": 1},
      "ContainFire": {"cases": [{"when": "fire == None", "score": -1}], "default": 0.2},
      "AggressiveFireSuppression": {"cases": [{"when": "fire == None", "score": -1}], "default": 0.5},
      "PrepareEquipment": {"cases": [{"when": "equipment == Ready", "score": -1}], "default": -0.1},
      "UpdateKnowledge": {"cases": [{"when": "knowledge == Good", "score": -1}], "default": -0.5}
    }}
  ],
  "terminals": [
    {"when": "fire == None and occupancy == 0", "label": "success"},
    {"when": "health == Incapacitated", "label": "failure"}
  ]
})json";

Scenario load_builtin() {
    auto result = parse_scenario(kFirefight);
    if (!result.value) throw std::logic_error("built-in scenario failed to parse");
    return std::move(*result.value);
}

}  // namespace

const Scenario& builtin_firefight() {
    static const Scenario scenario = load_builtin();
    return scenario;
}

std::string_view builtin_firefight_document() {
    static const std::string text = serialize_scenario(builtin_firefight());
    return text;
}

}  // namespace valence
