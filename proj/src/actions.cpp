#include "llmscape/actions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace llmscape {

const AgentState* WorldView::find_agent(std::string_view id) const noexcept {
  for (const auto& agent : agents)
    if (agent.id() == id) return &agent;
  return nullptr;
}

bool WorldView::is_participant(std::string_view id) const noexcept {
  return std::find(participants.begin(), participants.end(), id) != participants.end();
}

bool WorldView::is_engaged(std::string_view id) const noexcept {
  if (const AgentState* agent = find_agent(id)) return agent->conversation.has_value();
  return std::find(engaged_participants.begin(), engaged_participants.end(), id) !=
         engaged_participants.end();
}

std::vector<EntityPose> WorldView::poses() const {
  std::vector<EntityPose> result;
  result.reserve(agents.size());
  for (const auto& agent : agents) result.push_back(agent.pose);
  return result;
}

std::string_view to_string(ValidationCode code) noexcept {
  switch (code) {
    case ValidationCode::unknown_actor: return "unknown_actor";
    case ValidationCode::actor_busy: return "actor_busy";
    case ValidationCode::posture_violation: return "posture_violation";
    case ValidationCode::target_missing: return "target_missing";
    case ValidationCode::target_unknown: return "target_unknown";
    case ValidationCode::target_self: return "target_self";
    case ValidationCode::target_out_of_range: return "target_out_of_range";
    case ValidationCode::target_busy: return "target_busy";
    case ValidationCode::target_out_of_bounds: return "target_out_of_bounds";
    case ValidationCode::no_active_plan: return "no_active_plan";
  }
  return "unknown_actor";
}

std::optional<ValidationCode> validate_action(const ActionRequest& request,
                                              const AgentState& agent, const WorldView& world) {
  if (request.actor != agent.id()) return ValidationCode::unknown_actor;
  if (!agent.idle(world.clock.tick)) return ValidationCode::actor_busy;

  const Posture posture = agent.pose.posture;
  switch (request.kind) {
    case ActionKind::stand_up:
      if (posture == Posture::standing) return ValidationCode::posture_violation;
      break;
    case ActionKind::sit_down:
    case ActionKind::take_nap:
    case ActionKind::dance:
    case ActionKind::wander:
      if (posture != Posture::standing) return ValidationCode::posture_violation;
      break;
    case ActionKind::go_to: {
      if (posture != Posture::standing) return ValidationCode::posture_violation;
      const auto* point = std::get_if<Vec2>(&request.target);
      if (point == nullptr) return ValidationCode::target_missing;
      if (!world.terrain.in_bounds(*point)) return ValidationCode::target_out_of_bounds;
      break;
    }
    case ActionKind::pile_up_sand: {
      if (std::holds_alternative<std::string>(request.target)) return ValidationCode::target_missing;
      const auto* point = std::get_if<Vec2>(&request.target);
      if (point != nullptr && !world.terrain.in_bounds(*point)) return ValidationCode::target_out_of_bounds;
      break;
    }
    case ActionKind::talk_to: {
      const auto* target = std::get_if<std::string>(&request.target);
      if (target == nullptr || target->empty()) return ValidationCode::target_missing;
      if (*target == agent.id()) return ValidationCode::target_self;
      if (world.is_participant(*target)) {
        if (world.is_engaged(*target)) return ValidationCode::target_busy;
        break;
      }
      const AgentState* other = world.find_agent(*target);
      if (other == nullptr) return ValidationCode::target_unknown;
      if ((other->pose.position - agent.pose.position).norm() > world.perception_radius)
        return ValidationCode::target_out_of_range;
      if (other->conversation) return ValidationCode::target_busy;
      break;
    }
    case ActionKind::adapt_your_plan:
      if (!agent.plan || agent.plan->steps.empty()) return ValidationCode::no_active_plan;
      break;
    default:
      break;
  }
  return std::nullopt;
}

CellRange pile_region(const TerrainGrid& terrain, const Vec2& target) {
  const int cx = static_cast<int>(std::floor(target.x()));
  const int cy = static_cast<int>(std::floor(target.y()));
  return terrain.clip({cx - 1, cy - 1, 3, 3});
}

namespace {

std::string point_text(const Vec2& p) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "(%.1f, %.1f)", p.x(), p.y());
  return buffer;
}

}  // namespace

ActionEffects execute_action(const ActionRequest& request, const AgentState& actor,
                             const WorldView& world, SessionRng& rng, const ActionConfig& config) {
  ActionEffects effects;
  effects.duration_ticks = action_duration(request.kind);
  const std::string& self = actor.id();

  switch (request.kind) {
    case ActionKind::pile_up_sand: {
      const auto* point = std::get_if<Vec2>(&request.target);
      const Vec2 where = point ? *point : actor.pose.position;
      effects.terrain_edits.push_back({pile_region(world.terrain, where), config.pile_delta});
      effects.spawned_memories.push_back("I piled up sand at " + point_text(where) + ".");
      break;
    }
    case ActionKind::go_to: {
      const Vec2 target = std::get<Vec2>(request.target);
      effects.pose_changes.push_back({self, std::nullopt, target});
      effects.duration_ticks =
          travel_duration((target - actor.pose.position).norm(), config.agent_speed);
      effects.spawned_memories.push_back("I set off towards " + point_text(target) + ".");
      break;
    }
    case ActionKind::wander: {
      const Vec2 target(static_cast<double>(rng.uniform_int(0, world.terrain.width() - 1)) + 0.5,
                        static_cast<double>(rng.uniform_int(0, world.terrain.height() - 1)) + 0.5);
      effects.pose_changes.push_back({self, std::nullopt, target});
      effects.spawned_memories.push_back("I wandered off towards " + point_text(target) + ".");
      break;
    }
    case ActionKind::whistle: {
      WorldEvent event;
      event.kind = EventKind::ambient;
      event.magnitude = 1.0;
      event.region = {actor.pose.cell_x(), actor.pose.cell_y(), 1, 1};
      event.tick = world.clock.tick;
      event.payload = "a whistle";
      event.source = self;
      effects.spawned_events.push_back(std::move(event));
      effects.spawned_memories.push_back("I whistled a tune.");
      break;
    }
    case ActionKind::talk_to:
      effects.delegation = Delegation::conversation;
      effects.spawned_memories.push_back("I started talking to " + std::get<std::string>(request.target) + ".");
      break;
    case ActionKind::self_reflect:
      effects.delegation = Delegation::reflection;
      effects.spawned_memories.push_back("I paused to reflect.");
      break;
    case ActionKind::formulate_goals:
      effects.delegation = Delegation::formulate_goals;
      effects.spawned_memories.push_back("I thought about what I want to do.");
      break;
    case ActionKind::adapt_your_plan:
      effects.delegation = Delegation::adapt_plan;
      effects.spawned_memories.push_back("I reconsidered my plan.");
      break;
    case ActionKind::sit_down:
      effects.pose_changes.push_back({self, Posture::sitting, std::nullopt});
      effects.spawned_memories.push_back("I sat down.");
      break;
    case ActionKind::take_nap:
      effects.pose_changes.push_back({self, Posture::napping, std::nullopt});
      effects.spawned_memories.push_back("I lay down for a nap.");
      break;
    case ActionKind::stand_up:
      effects.pose_changes.push_back({self, Posture::standing, std::nullopt});
      effects.spawned_memories.push_back("I stood up.");
      break;
    case ActionKind::rest:
      effects.spawned_memories.push_back("I rested.");
      break;
    case ActionKind::wait:
      effects.spawned_memories.push_back("I waited.");
      break;
    case ActionKind::dance:
      effects.spawned_memories.push_back("I danced.");
      break;
  }

  const SomaticState after = update_somatic(actor.somatic, request.kind, effects.duration_ticks);
  effects.somatic_delta = after.tiredness - actor.somatic.tiredness;
  return effects;
}

}  // namespace llmscape
