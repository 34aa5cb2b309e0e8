#pragma once

#include <optional>
#include <string>
#include <vector>

#include "llmscape/catalogue.hpp"
#include "llmscape/memory.hpp"
#include "llmscape/world.hpp"

namespace llmscape {

struct Persona {
  std::string name;
  std::string disposition;
  std::string speech_style;
};

struct SomaticState {
  double tiredness = 0.0;
};

/// Tiredness change per tick of `kind`.
double tiredness_rate(ActionKind kind) noexcept;

/// tiredness += rate(kind) * duration, clamped to [0, 1].
SomaticState update_somatic(SomaticState somatic, ActionKind kind, int duration_ticks);

/// Second-person phrase for the prompt; thresholds 0.33 / 0.66 / 0.85.
std::string_view somatic_descriptor(const SomaticState& somatic) noexcept;
/// 0 rested .. 3 exhausted, same thresholds.
int tiredness_bucket(const SomaticState& somatic) noexcept;

struct PlanStep {
  std::string description;
  ActionKind action = ActionKind::wait;
  ActionTarget target;
};

struct Plan {
  std::string goal;
  std::vector<PlanStep> steps;
  std::size_t cursor = 0;

  bool finished() const noexcept { return cursor >= steps.size(); }
};

Json to_json(const Plan& plan);

using ConversationId = int;

struct AgentState {
  Persona persona;
  EntityPose pose;
  SomaticState somatic;
  MemoryStore memory;
  std::optional<Plan> plan;
  Tick busy_until = 0;
  std::optional<ConversationId> conversation;

  /// Action currently executing, if any, and where it is walking to.
  std::optional<ActionKind> current_action;
  std::optional<Vec2> move_target;

  /// What the agent perceived last tick; drives change observations.
  std::optional<Phase> last_phase;
  std::vector<std::string> last_nearby;
  /// Set once the agent has had its first turn.
  bool activated = false;
  /// No automatic reflection before this tick (set after a failed attempt).
  Tick reflection_retry_at = 0;

  const std::string& id() const noexcept { return persona.name; }
  bool idle(Tick now) const noexcept { return busy_until <= now && !conversation; }
};

}  // namespace llmscape
