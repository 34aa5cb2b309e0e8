#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "llmscape/actions.hpp"
#include "llmscape/agent_state.hpp"
#include "llmscape/memory.hpp"
#include "llmscape/mind.hpp"
#include "llmscape/world.hpp"

namespace llmscape {

struct TerrainBump {
  double x = 0.0;
  double y = 0.0;
  double radius = 1.0;
  double height = 0.0;
};

struct AgentSpec {
  Persona persona;
  Vec2 position = Vec2::Zero();
  Posture posture = Posture::standing;
};

/// Everything needed to start a session. Loaded from a JSON file; see
/// docs/formats.md for the schema.
struct Scenario {
  std::string name = "unnamed";
  std::uint64_t seed = 0;
  int width = 64;
  int height = 64;
  double fill = 0.5;
  std::vector<TerrainBump> bumps;
  std::vector<AgentSpec> agents;
  std::vector<std::string> participants;

  int ticks_per_day = 400;
  double tremor_threshold = 0.5;
  int reflection_threshold = kDefaultReflectionThreshold;
  int embedding_dimension = kDefaultEmbeddingDimension;
  int max_turns = 8;
  /// Ticks an open conversation waits for a participant's reply.
  int participant_reply_timeout = 20;
  std::optional<CellRange> microphone;
  /// Agents formulate goals on their first turn.
  bool plan_on_start = false;
  MindConfig mind;
  ActionConfig actions;

  /// Inline script text (built-in scenario) or a path relative to the file.
  std::optional<std::string> script_text;
  std::optional<std::filesystem::path> script_path;

  /// Throws Error(configuration_error) for out-of-range values.
  void validate() const;
  TerrainGrid initial_terrain() const;
  CellRange microphone_region() const;
};

Scenario scenario_from_json(const Json& j, const std::filesystem::path& base_dir = {});
Json to_json(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);
/// The woman, the boy and the flamingo on a 64x64 island, with its script.
Scenario default_scenario();
/// "default" or a file path.
Scenario resolve_scenario(const std::string& name_or_path);

}  // namespace llmscape
