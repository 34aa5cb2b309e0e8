#pragma once

#include <deque>
#include <string>
#include <variant>
#include <vector>

#include "llmscape/actions.hpp"
#include "llmscape/gateway.hpp"
#include "llmscape/mind.hpp"
#include "llmscape/session_log.hpp"

namespace support {

using namespace llmscape;

/// Answers from a queue; Failure entries throw Error(backend_error). An
/// empty queue answers with a wait call.
struct QueueBackend : Backend {
  struct Failure {
    std::string why;
  };
  std::deque<std::variant<ModelReply, Failure>> replies;
  std::vector<PromptContext> seen;

  QueueBackend& text(std::string body) {
    replies.emplace_back(ModelReply::text(std::move(body)));
    return *this;
  }
  QueueBackend& call(std::string name, Json arguments = Json::object()) {
    replies.emplace_back(ModelReply::calls({ToolCall{std::move(name), std::move(arguments)}}));
    return *this;
  }
  QueueBackend& fail(std::string why = "down") {
    replies.emplace_back(Failure{std::move(why)});
    return *this;
  }

  ModelReply complete(const PromptContext& context) override {
    seen.push_back(context);
    if (replies.empty()) return ModelReply::calls({ToolCall{"wait", Json::object()}});
    auto next = std::move(replies.front());
    replies.pop_front();
    if (auto* failure = std::get_if<Failure>(&next)) throw Error(Errc::backend_error, failure->why);
    return std::get<ModelReply>(std::move(next));
  }
};

inline AgentState make_agent(const std::string& name, double x, double y,
                             Posture posture = Posture::standing) {
  AgentState agent;
  agent.persona = {name, "A test character.", "plainly"};
  agent.pose = {name, Vec2(x, y), posture};
  return agent;
}

/// Owns everything a WorldView points at.
struct Stage {
  WorldClock clock{1, 400};
  TerrainGrid terrain{64, 64, 0.5};
  std::vector<AgentState> agents;
  std::vector<std::string> participants;
  std::vector<std::string> engaged;
  double radius = 10.0;

  AgentState& add(const std::string& name, double x, double y, Posture posture = Posture::standing) {
    agents.push_back(make_agent(name, x, y, posture));
    return agents.back();
  }
  AgentState& agent(const std::string& name) {
    for (auto& a : agents)
      if (a.id() == name) return a;
    throw Error(Errc::input_error, "no agent " + name);
  }
  WorldView view() const { return {clock, terrain, agents, participants, engaged, radius}; }
};

inline ActionRequest request(const std::string& actor, ActionKind kind, ActionTarget target = {}) {
  return {actor, kind, std::move(target), 0};
}

}  // namespace support
