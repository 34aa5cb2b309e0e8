#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "llmscape/agent_state.hpp"
#include "llmscape/catalogue.hpp"
#include "llmscape/rng.hpp"
#include "llmscape/world.hpp"

namespace llmscape {

/// Read-only view of the world handed to validation, execution and
/// perception.
struct WorldView {
  const WorldClock& clock;
  const TerrainGrid& terrain;
  std::span<const AgentState> agents;
  /// Human participants that agents may address.
  std::span<const std::string> participants;
  /// Participants currently in an open conversation.
  std::span<const std::string> engaged_participants;
  double perception_radius = 10.0;

  const AgentState* find_agent(std::string_view id) const noexcept;
  bool is_participant(std::string_view id) const noexcept;
  bool is_engaged(std::string_view id) const noexcept;
  std::vector<EntityPose> poses() const;
};

enum class ValidationCode {
  unknown_actor,
  actor_busy,
  posture_violation,
  target_missing,
  target_unknown,
  target_self,
  target_out_of_range,
  target_busy,
  target_out_of_bounds,
  no_active_plan,
};
std::string_view to_string(ValidationCode code) noexcept;

/// nullopt when `request` may start now. Rules:
///   stand_up needs sitting or napping; sit_down and take_nap need standing;
///   dance, wander and go_to need standing; talk_to needs a free target
///   within perception radius (participants are always in range);
///   go_to and pile_up_sand targets must be in bounds; adapt_your_plan
///   needs an active plan.
std::optional<ValidationCode> validate_action(const ActionRequest& request,
                                              const AgentState& agent, const WorldView& world);

/// What the orchestrator has to do beyond applying plain effects.
enum class Delegation { none, conversation, reflection, formulate_goals, adapt_plan };

struct PoseChange {
  std::string entity_id;
  std::optional<Posture> posture;
  std::optional<Vec2> move_target;
};

struct TerrainChange {
  CellRange region;
  double delta = 0.0;
};

struct ActionEffects {
  std::vector<PoseChange> pose_changes;
  std::vector<TerrainChange> terrain_edits;
  double somatic_delta = 0.0;
  std::vector<WorldEvent> spawned_events;
  /// First-person observations for the actor.
  std::vector<std::string> spawned_memories;
  int duration_ticks = 1;
  Delegation delegation = Delegation::none;
};

struct ActionConfig {
  double agent_speed = 2.0;
  double pile_delta = 0.1;
};

/// Effects of a validated request. Pure apart from drawing wander targets
/// from `rng`.
ActionEffects execute_action(const ActionRequest& request, const AgentState& actor,
                             const WorldView& world, SessionRng& rng,
                             const ActionConfig& config = {});

/// The 3x3 block centred on `target`'s cell, clipped to the grid.
CellRange pile_region(const TerrainGrid& terrain, const Vec2& target);

}  // namespace llmscape
