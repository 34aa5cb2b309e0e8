#include "llmscape/agent_state.hpp"

#include <algorithm>

namespace llmscape {

double tiredness_rate(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::rest: return -0.01;
    case ActionKind::take_nap: return -0.03;
    case ActionKind::sit_down: return -0.005;
    case ActionKind::wait: return -0.002;
    case ActionKind::dance: return 0.02;
    case ActionKind::pile_up_sand: return 0.015;
    case ActionKind::wander:
    case ActionKind::go_to:
      return 0.01;
    default: return 0.002;
  }
}

SomaticState update_somatic(SomaticState somatic, ActionKind kind, int duration_ticks) {
  if (duration_ticks <= 0) return somatic;
  somatic.tiredness =
      std::clamp(somatic.tiredness + tiredness_rate(kind) * duration_ticks, 0.0, 1.0);
  return somatic;
}

int tiredness_bucket(const SomaticState& somatic) noexcept {
  if (somatic.tiredness >= 0.85) return 3;
  if (somatic.tiredness >= 0.66) return 2;
  if (somatic.tiredness >= 0.33) return 1;
  return 0;
}

std::string_view somatic_descriptor(const SomaticState& somatic) noexcept {
  switch (tiredness_bucket(somatic)) {
    case 3: return "You are exhausted.";
    case 2: return "You feel tired.";
    case 1: return "You feel a little tired.";
    default: return "You feel rested.";
  }
}

Json to_json(const Plan& plan) {
  Json steps = Json::array();
  for (const auto& step : plan.steps) {
    Json item = {{"description", step.description}, {"action", to_string(step.action)}};
    if (!std::holds_alternative<std::monostate>(step.target)) item["target"] = to_json(step.target);
    steps.push_back(std::move(item));
  }
  return {{"goal", plan.goal}, {"steps", steps}, {"cursor", plan.cursor}};
}

}  // namespace llmscape
