#include "llmscape/catalogue.hpp"

#include <algorithm>
#include <cmath>

namespace llmscape {

std::string_view to_string(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::talk_to: return "talk_to";
    case ActionKind::pile_up_sand: return "pile_up_sand";
    case ActionKind::rest: return "rest";
    case ActionKind::wait: return "wait";
    case ActionKind::wander: return "wander";
    case ActionKind::go_to: return "go_to";
    case ActionKind::sit_down: return "sit_down";
    case ActionKind::take_nap: return "take_nap";
    case ActionKind::stand_up: return "stand_up";
    case ActionKind::dance: return "dance";
    case ActionKind::formulate_goals: return "formulate_goals";
    case ActionKind::adapt_your_plan: return "adapt_your_plan";
    case ActionKind::self_reflect: return "self_reflect";
    case ActionKind::whistle: return "whistle";
  }
  return "wait";
}

std::optional<ActionKind> action_from_string(std::string_view name) noexcept {
  for (ActionKind kind : kActionCatalogue)
    if (to_string(kind) == name) return kind;
  return std::nullopt;
}

Json to_json(const ActionTarget& target) {
  if (const auto* entity = std::get_if<std::string>(&target)) return *entity;
  if (const auto* point = std::get_if<Vec2>(&target)) return {{"x", point->x()}, {"y", point->y()}};
  return nullptr;
}

ActionTarget action_target_from_json(const Json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_object() && j.contains("x") && j.contains("y") && j["x"].is_number() && j["y"].is_number())
    return Vec2(j["x"].get<double>(), j["y"].get<double>());
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Vec2(j[0].get<double>(), j[1].get<double>());
  return std::monostate{};
}

int action_duration(ActionKind kind) noexcept {
  switch (kind) {
    case ActionKind::wait:
    case ActionKind::whistle:
    case ActionKind::stand_up:
    case ActionKind::sit_down:
    case ActionKind::go_to:
    case ActionKind::talk_to:
      return 1;
    case ActionKind::rest: return 10;
    case ActionKind::take_nap: return 30;
    case ActionKind::dance: return 5;
    case ActionKind::pile_up_sand: return 5;
    case ActionKind::wander: return 8;
    case ActionKind::formulate_goals:
    case ActionKind::adapt_your_plan:
    case ActionKind::self_reflect:
      return 2;
  }
  return 1;
}

int travel_duration(double distance, double speed) noexcept {
  if (!(distance > 0.0) || !(speed > 0.0)) return 1;
  return std::max(1, static_cast<int>(std::ceil(distance / speed - 1e-9)));
}

const std::vector<ToolDescriptor>& action_tools() {
  static const std::vector<ToolDescriptor> tools = [] {
    auto target_entity = ToolParameter{"target", ParamType::entity, true, "who to talk to"};
    auto target_cell = [](bool required, std::string text) {
      return ToolParameter{"target", ParamType::coordinates, required, std::move(text)};
    };
    std::vector<ToolDescriptor> list;
    for (ActionKind kind : kActionCatalogue) {
      ToolDescriptor tool;
      tool.name = std::string(to_string(kind));
      switch (kind) {
        case ActionKind::talk_to:
          tool.description = "Start a conversation with someone nearby.";
          tool.parameters.push_back(target_entity);
          break;
        case ActionKind::pile_up_sand:
          tool.description = "Heap sand into a small mound, here or at a nearby spot.";
          tool.parameters.push_back(target_cell(false, "where to pile the sand"));
          break;
        case ActionKind::go_to:
          tool.description = "Walk to a place.";
          tool.parameters.push_back(target_cell(true, "destination"));
          break;
        case ActionKind::rest: tool.description = "Rest for a while."; break;
        case ActionKind::wait: tool.description = "Do nothing for a moment."; break;
        case ActionKind::wander: tool.description = "Stroll around aimlessly."; break;
        case ActionKind::sit_down: tool.description = "Sit down."; break;
        case ActionKind::take_nap: tool.description = "Lie down and sleep for a while."; break;
        case ActionKind::stand_up: tool.description = "Get up."; break;
        case ActionKind::dance: tool.description = "Dance."; break;
        case ActionKind::formulate_goals: tool.description = "Think about what you want and make a plan."; break;
        case ActionKind::adapt_your_plan: tool.description = "Revise your current plan."; break;
        case ActionKind::self_reflect: tool.description = "Reflect on what you have experienced."; break;
        case ActionKind::whistle: tool.description = "Whistle a tune."; break;
      }
      list.push_back(std::move(tool));
    }
    return list;
  }();
  return tools;
}

ActionRequest request_from_call(const ToolCall& call, std::string actor, Tick tick) {
  ActionRequest request;
  request.actor = std::move(actor);
  request.kind = action_from_string(call.name).value_or(ActionKind::wait);
  request.requested_tick = tick;
  if (call.arguments.is_object() && call.arguments.contains("target"))
    request.target = action_target_from_json(call.arguments["target"]);
  return request;
}

}  // namespace llmscape
