#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "llmscape/gateway.hpp"
#include "llmscape/world.hpp"

namespace llmscape {

enum class ActionKind {
  talk_to,
  pile_up_sand,
  rest,
  wait,
  wander,
  go_to,
  sit_down,
  take_nap,
  stand_up,
  dance,
  formulate_goals,
  adapt_your_plan,
  self_reflect,
  whistle,
};

inline constexpr std::array<ActionKind, 14> kActionCatalogue = {
    ActionKind::talk_to,   ActionKind::pile_up_sand,    ActionKind::rest,
    ActionKind::wait,      ActionKind::wander,          ActionKind::go_to,
    ActionKind::sit_down,  ActionKind::take_nap,        ActionKind::stand_up,
    ActionKind::dance,     ActionKind::formulate_goals, ActionKind::adapt_your_plan,
    ActionKind::self_reflect, ActionKind::whistle,
};

std::string_view to_string(ActionKind kind) noexcept;
std::optional<ActionKind> action_from_string(std::string_view name) noexcept;

/// No target, an entity id (talk_to) or cell coordinates (go_to, pile_up_sand).
using ActionTarget = std::variant<std::monostate, std::string, Vec2>;

Json to_json(const ActionTarget& target);
ActionTarget action_target_from_json(const Json& j);

struct ActionRequest {
  std::string actor;
  ActionKind kind = ActionKind::wait;
  ActionTarget target;
  Tick requested_tick = 0;
};

/// Fixed duration table. go_to and talk_to report their one-tick minimum;
/// their real length depends on distance and conversation length.
int action_duration(ActionKind kind) noexcept;

/// ceil(distance / speed), at least 1.
int travel_duration(double distance, double speed) noexcept;

/// Tool descriptors for all 14 actions, in catalogue order.
const std::vector<ToolDescriptor>& action_tools();

/// Builds a request from a call that already passed validate_tool_calls.
ActionRequest request_from_call(const ToolCall& call, std::string actor, Tick tick);

}  // namespace llmscape
