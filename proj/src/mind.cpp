#include "llmscape/mind.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace llmscape {
namespace {

std::string format(const char* pattern, double a, double b = 0.0) {
  char buffer[96];
  std::snprintf(buffer, sizeof buffer, pattern, a, b);
  return buffer;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string action_list() {
  std::string names;
  for (ActionKind kind : kActionCatalogue) {
    if (!names.empty()) names += ", ";
    names += to_string(kind);
  }
  return names;
}

std::string plan_text(const AgentState& agent) {
  if (!agent.plan || agent.plan->steps.empty()) return "You have no plan.";
  const Plan& plan = *agent.plan;
  std::string text = "Your goal: " + plan.goal + ".";
  if (plan.finished()) return text + " You have completed every step of your plan.";
  const PlanStep& step = plan.steps[plan.cursor];
  return text + " Next step: " + step.description + " (" + std::string(to_string(step.action)) + ").";
}

std::string describe_event(const WorldEvent& event, const std::string& self) {
  switch (event.kind) {
    case EventKind::tremor:
      return format("The ground trembled nearby (strength %.2f).", event.magnitude);
    case EventKind::shadow:
      if (event.target && *event.target != self) return "A shadow fell over " + *event.target + ".";
      return "A shadow passed over me.";
    case EventKind::utterance:
      if (event.target && *event.target == self)
        return event.source + " said to me: \"" + event.payload.value_or("") + "\"";
      return event.source + " said: \"" + event.payload.value_or("") + "\"";
    case EventKind::ambient:
      return "I heard " + event.payload.value_or("a sound") + " from " + event.source + ".";
  }
  return "Something happened.";
}

}  // namespace

bool in_perception(const AgentState& agent, const WorldEvent& event, double radius) {
  const double distance = event.region.distance_to(agent.pose.position);
  switch (event.kind) {
    case EventKind::ambient: return distance <= 2.0 * radius;
    case EventKind::utterance:
      return (event.target && *event.target == agent.id()) || distance <= radius;
    default: return distance <= radius;
  }
}

namespace {

PromptContext cognition_prompt(AgentState& agent, const WorldView& world, const MindConfig& config,
                               std::string instructions) {
  PromptInputs inputs;
  inputs.agent_id = agent.id();
  inputs.system_text = persona_text(agent);
  inputs.world_context = describe_surroundings(agent, world, config.perception_radius) + "\n" +
                         plan_text(agent) + "\n" + std::move(instructions);
  inputs.memories = retrieve_top_k(agent.memory, embed_text(inputs.world_context, agent.memory.dimension()),
                                   config.retrieve_k, world.clock.tick, config.weights, config.half_life);
  return assemble_prompt(std::move(inputs), config.token_budget);
}

void log_failure(SessionLog& log, const AgentState& agent, Tick tick, const Error& error,
                 std::string_view during) {
  log.emit(tick, agent.id(), LogCategory::error,
           {{"code", to_string(error.code())}, {"message", error.what()}, {"during", during}});
}

void remember_plan(AgentState& agent, Tick now, Backend* backend, std::string_view verb) {
  const std::string text = "I " + std::string(verb) + " my plan: " + agent.plan->goal + ".";
  agent.memory.remember(now, MemoryKind::plan, text, rate_importance(backend, agent.id(), text));
}

Json planning_payload(const Plan& plan, std::string_view kind) {
  Json payload = to_json(plan);
  payload["kind"] = kind;
  return payload;
}

}  // namespace

int rate_importance(Backend* backend, const std::string& agent_id, const std::string& text) {
  std::optional<int> rated;
  if (backend != nullptr) rated = backend->rate_importance(agent_id, text);
  return std::clamp(rated.value_or(heuristic_importance(text)), 1, 10);
}

std::string persona_text(const AgentState& agent) {
  std::string text = "You are " + agent.persona.name + ". " + agent.persona.disposition;
  if (!agent.persona.speech_style.empty()) text += " You speak " + agent.persona.speech_style + ".";
  text += " ";
  text += somatic_descriptor(agent.somatic);
  text += " You only know what you can perceive around you.";
  return text;
}

std::string describe_surroundings(const AgentState& agent, const WorldView& world, double radius) {
  const Vec2& here = agent.pose.position;
  std::string text = "It is " + std::string(to_string(world.clock.phase())) + ". You are " +
                     std::string(to_string(agent.pose.posture)) + format(" at (%.1f, %.1f).", here.x(), here.y());

  const auto poses = world.poses();
  const auto nearby = nearby_entities(poses, agent.id(), radius);
  if (nearby.empty()) {
    text += " Nobody is near you.";
  } else {
    for (const auto& id : nearby) {
      const AgentState* other = world.find_agent(id);
      text += " " + id + " is " + std::string(to_string(other->pose.posture)) +
              format(" %.1f cells away.", (other->pose.position - here).norm());
    }
  }
  if (!world.participants.empty()) text += " Visitors may speak to you.";

  // Only cells whose centres lie within the perception radius.
  const auto& terrain = world.terrain;
  double sum = 0.0;
  int count = 0;
  double highest = -1.0;
  Vec2 highest_at = here;
  const int x0 = std::max(0, static_cast<int>(std::floor(here.x() - radius)));
  const int x1 = std::min(terrain.width() - 1, static_cast<int>(std::ceil(here.x() + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(here.y() - radius)));
  const int y1 = std::min(terrain.height() - 1, static_cast<int>(std::ceil(here.y() + radius)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Vec2 centre(x + 0.5, y + 0.5);
      if ((centre - here).norm() > radius) continue;
      const double h = terrain.at(x, y);
      sum += h;
      ++count;
      if (h > highest) {
        highest = h;
        highest_at = centre;
      }
    }
  }
  if (count > 0) {
    text += format(" The sand around you is %.2f high on average;", sum / count);
    text += format(" the highest spot you can see is at (%.1f, %.1f).", highest_at.x(), highest_at.y());
  }
  return text;
}

std::vector<MemoryRecord> perceive(AgentState& agent, const WorldView& world,
                                   std::span<const WorldEvent> events, Backend* backend,
                                   SessionLog& log, const MindConfig& config) {
  std::vector<std::string> observations;
  const Phase phase = world.clock.phase();
  if (agent.last_phase && *agent.last_phase != phase)
    observations.push_back("It is now " + std::string(to_string(phase)) + ".");
  agent.last_phase = phase;

  const auto poses = world.poses();
  auto nearby = nearby_entities(poses, agent.id(), config.perception_radius);
  for (const auto& id : nearby)
    if (std::find(agent.last_nearby.begin(), agent.last_nearby.end(), id) == agent.last_nearby.end())
      observations.push_back(id + " came near me.");
  for (const auto& id : agent.last_nearby)
    if (std::find(nearby.begin(), nearby.end(), id) == nearby.end())
      observations.push_back(id + " moved away from me.");
  agent.last_nearby = std::move(nearby);

  for (const auto& event : events) {
    if (event.source == agent.id()) continue;
    if (in_perception(agent, event, config.perception_radius))
      observations.push_back(describe_event(event, agent.id()));
  }

  std::vector<MemoryRecord> records;
  const Tick now = world.clock.tick;
  for (auto& text : observations) {
    const int importance = rate_importance(backend, agent.id(), text);
    records.push_back(agent.memory.remember(now, MemoryKind::observation, text, importance));
    log.emit(now, agent.id(), LogCategory::contemplation, {{"kind", "observation"}, {"text", text}});
  }
  return records;
}

PromptContext action_prompt(AgentState& agent, const WorldView& world, const MindConfig& config) {
  PromptContext context = cognition_prompt(agent, world, config, "Choose your next action by calling exactly one tool.");
  context.tool_catalogue = action_tools();
  return context;
}

ActionRequest choose_action(AgentState& agent, const WorldView& world, Backend& backend,
                            SessionLog& log, const MindConfig& config) {
  const Tick now = world.clock.tick;
  if (!agent.idle(now)) throw Error(Errc::precondition_violation, agent.id() + " is busy");

  const PromptContext context = action_prompt(agent, world, config);
  std::optional<Error> last_error;
  for (int attempt = 0; attempt < std::max(1, config.choice_attempts); ++attempt) {
    try {
      const ModelReply reply = backend.complete(context);
      // Models without native tool calling may put the call in the text.
      const auto calls = reply.is_text() ? parse_tool_calls(reply.as_text(), action_tools())
                                         : validate_tool_calls(reply.as_calls(), action_tools());
      return request_from_call(calls.front(), agent.id(), now);
    } catch (const Error& e) {
      last_error = e;
    }
  }
  log.emit(now, agent.id(), LogCategory::error,
           {{"code", to_string(last_error->code())},
            {"message", last_error->what()},
            {"during", "choose_action"},
            {"fallback", "wait"}});
  return {agent.id(), ActionKind::wait, std::monostate{}, now};
}

Plan parse_plan(std::string_view text, std::size_t min_steps, std::size_t max_steps) {
  auto reject = [](const std::string& why) -> Plan { throw Error(Errc::plan_rejected, why); };
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open)
    return reject("plan reply holds no JSON object");
  const Json j = Json::parse(text.substr(open, close - open + 1), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return reject("plan reply is not valid JSON");
  if (!j.contains("steps") || !j["steps"].is_array()) return reject("plan has no step list");

  Plan plan;
  if (j.contains("goal")) {
    if (!j["goal"].is_string()) return reject("plan goal is not text");
    plan.goal = j["goal"].get<std::string>();
  }
  const Json& steps = j["steps"];
  if (steps.size() < min_steps || steps.size() > max_steps)
    return reject("plan needs " + std::to_string(min_steps) + " to " + std::to_string(max_steps) +
                  " steps, got " + std::to_string(steps.size()));
  for (const auto& item : steps) {
    if (!item.is_object() || !item.contains("action") || !item["action"].is_string())
      return reject("plan step without an action");
    const std::string name = item["action"].get<std::string>();
    const auto kind = action_from_string(name);
    if (!kind) return reject("plan step names unknown action '" + name + "'");
    PlanStep step;
    step.action = *kind;
    step.description = item.contains("description") && item["description"].is_string()
                           ? item["description"].get<std::string>()
                           : name;
    if (item.contains("target")) step.target = action_target_from_json(item["target"]);
    plan.steps.push_back(std::move(step));
  }
  return plan;
}

Plan formulate_goals(AgentState& agent, const WorldView& world, Backend& backend, SessionLog& log,
                     const MindConfig& config) {
  const Tick now = world.clock.tick;
  const PromptContext context = cognition_prompt(
      agent, world, config,
      "Decide what you want to achieve and plan 2 to 5 steps. Reply with JSON: "
      "{\"goal\": \"...\", \"steps\": [{\"description\": \"...\", \"action\": \"...\", \"target\": ...}]} "
      "using only these actions: " + action_list() + ".");
  try {
    const ModelReply reply = backend.complete(context);
    if (!reply.is_text()) throw Error(Errc::plan_rejected, "plan reply carried tool calls");
    Plan plan = parse_plan(reply.as_text(), 2, 5);
    if (plan.goal.empty()) throw Error(Errc::plan_rejected, "plan has no goal");
    agent.plan = plan;
    log.emit(now, agent.id(), LogCategory::planning, planning_payload(plan, "formulate"));
    remember_plan(agent, now, &backend, "made");
    return plan;
  } catch (const Error& e) {
    log_failure(log, agent, now, e, "formulate_goals");
    throw;
  }
}

Plan adapt_plan(AgentState& agent, const WorldEvent& trigger, const WorldView& world,
                Backend& backend, SessionLog& log, const MindConfig& config) {
  if (!agent.plan || agent.plan->steps.empty())
    throw Error(Errc::precondition_violation, agent.id() + " has no active plan");
  const Tick now = world.clock.tick;
  const PromptContext context = cognition_prompt(
      agent, world, config,
      "Something happened: " + describe_event(trigger, agent.id()) +
          " Revise the steps you have not done yet (0 to 5 steps). Reply with JSON: "
          "{\"goal\": \"...\", \"steps\": [...]} using only these actions: " + action_list() + ".");
  try {
    const ModelReply reply = backend.complete(context);
    if (!reply.is_text()) throw Error(Errc::plan_rejected, "plan reply carried tool calls");
    Plan revision = parse_plan(reply.as_text(), 0, 5);

    Plan plan = *agent.plan;
    plan.steps.resize(plan.cursor);
    for (auto& step : revision.steps) plan.steps.push_back(std::move(step));
    if (!revision.goal.empty()) plan.goal = std::move(revision.goal);
    if (plan.steps.empty()) throw Error(Errc::plan_rejected, "revised plan has no steps");

    agent.plan = plan;
    log.emit(now, agent.id(), LogCategory::planning, planning_payload(plan, "adapt"));
    remember_plan(agent, now, &backend, "revised");
    return plan;
  } catch (const Error& e) {
    log_failure(log, agent, now, e, "adapt_your_plan");
    throw;
  }
}

PromptContext utterance_prompt(AgentState& agent, const std::string& interlocutor,
                               std::span<const ConversationTurn> history, const WorldView& world,
                               const MindConfig& config) {
  PromptInputs inputs;
  inputs.agent_id = agent.id();
  inputs.system_text = persona_text(agent) + " You are talking with " + interlocutor +
                       ". Say one short line. Write " + std::string(kEndMarker) +
                       " when you want to end the conversation.";
  inputs.world_context = describe_surroundings(agent, world, config.perception_radius);
  inputs.memories = retrieve_top_k(agent.memory, embed_text(interlocutor, agent.memory.dimension()),
                                   config.retrieve_k, world.clock.tick, config.weights, config.half_life);
  inputs.history.assign(history.begin(), history.end());
  return assemble_prompt(std::move(inputs), config.token_budget);
}

Utterance compose_utterance(AgentState& agent, const std::string& interlocutor,
                            std::span<const ConversationTurn> history, ConversationId conversation,
                            const WorldView& world, Backend& backend, SessionLog& log,
                            const MindConfig& config) {
  const Tick now = world.clock.tick;
  const PromptContext context = utterance_prompt(agent, interlocutor, history, world, config);
  const ModelReply reply = backend.complete(context);
  if (!reply.is_text()) throw Error(Errc::backend_error, "utterance reply carried tool calls");

  Utterance utterance;
  std::string text = reply.as_text();
  for (auto at = text.find(kEndMarker); at != std::string::npos; at = text.find(kEndMarker)) {
    utterance.ends_conversation = true;
    text.erase(at, kEndMarker.size());
  }
  utterance.text = trim(text);
  if (utterance.text.empty() && !utterance.ends_conversation)
    throw Error(Errc::backend_error, "empty utterance");

  if (!utterance.text.empty()) {
    log.emit(now, agent.id(), LogCategory::speech,
             {{"conversation", conversation}, {"listener", interlocutor}, {"text", utterance.text}});
    const std::string memory = "I said to " + interlocutor + ": \"" + utterance.text + "\"";
    agent.memory.remember(now, MemoryKind::speech, memory, rate_importance(&backend, agent.id(), memory));
  }
  return utterance;
}

}  // namespace llmscape
