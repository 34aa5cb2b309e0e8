#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llmscape/actions.hpp"
#include "llmscape/agent_state.hpp"
#include "llmscape/gateway.hpp"
#include "llmscape/session_log.hpp"

namespace llmscape {

struct MindConfig {
  double perception_radius = 10.0;
  int token_budget = 2048;
  std::size_t retrieve_k = 8;
  RetrievalWeights weights;
  double half_life = kDefaultHalfLife;
  /// Backend attempts per decision: the first try plus two retries.
  int choice_attempts = 3;
};

/// Turns this tick's stimuli into observation memories: a phase change,
/// entities entering or leaving the perception radius, and every event in
/// range (ambient sounds carry twice as far; events caused by the agent
/// itself are skipped). Each observation is stored and logged.
std::vector<MemoryRecord> perceive(AgentState& agent, const WorldView& world,
                                   std::span<const WorldEvent> events, Backend* backend,
                                   SessionLog& log, const MindConfig& config = {});

/// Whether `agent` notices `event`: within the perception radius of its
/// region, twice that for ambient sounds, always for utterances addressed
/// to the agent.
bool in_perception(const AgentState& agent, const WorldEvent& event, double perception_radius);

/// Local description handed to the model: phase, posture, nearby entities
/// and the sand within the perception radius. Contains nothing the agent
/// cannot perceive.
std::string describe_surroundings(const AgentState& agent, const WorldView& world,
                                  double perception_radius);

std::string persona_text(const AgentState& agent);

/// The prompt choose_action sends; exposed for inspection.
PromptContext action_prompt(AgentState& agent, const WorldView& world, const MindConfig& config);

/// Picks the next action through the backend's tool call. Unusable replies
/// are retried; after `choice_attempts` failures the agent waits and an
/// error entry is logged. Always returns a catalogue action.
/// Throws Error(precondition_violation) when the agent is busy.
ActionRequest choose_action(AgentState& agent, const WorldView& world, Backend& backend,
                            SessionLog& log, const MindConfig& config = {});

/// Asks for a goal and 2..5 steps. On success the plan replaces the old
/// one with cursor 0 and is logged; otherwise the old plan stays, an error
/// entry is logged and Error(plan_rejected) or Error(backend_error) is thrown.
Plan formulate_goals(AgentState& agent, const WorldView& world, Backend& backend,
                     SessionLog& log, const MindConfig& config = {});

/// Revises the steps from the cursor on in response to `trigger`; steps
/// before the cursor are kept verbatim. Throws Error(precondition_violation)
/// without an active plan.
Plan adapt_plan(AgentState& agent, const WorldEvent& trigger, const WorldView& world,
                Backend& backend, SessionLog& log, const MindConfig& config = {});

/// Parses a plan reply: {"goal":..,"steps":[{"description":..,"action":..,"target":..}]}.
/// Throws Error(plan_rejected).
Plan parse_plan(std::string_view text, std::size_t min_steps, std::size_t max_steps);

inline constexpr std::string_view kEndMarker = "[END]";

struct Utterance {
  std::string text;
  bool ends_conversation = false;
};

/// The prompt compose_utterance sends; exposed for inspection.
PromptContext utterance_prompt(AgentState& agent, const std::string& interlocutor,
                               std::span<const ConversationTurn> history, const WorldView& world,
                               const MindConfig& config);

/// Next line for `agent` in an open conversation. The end marker is
/// stripped and reported; non-empty text is logged as speech.
/// Throws Error(backend_error) when the backend fails or answers without text.
Utterance compose_utterance(AgentState& agent, const std::string& interlocutor,
                            std::span<const ConversationTurn> history, ConversationId conversation,
                            const WorldView& world, Backend& backend, SessionLog& log,
                            const MindConfig& config = {});

/// Importance from the backend when it rates, else the length heuristic.
int rate_importance(Backend* backend, const std::string& agent_id, const std::string& text);

}  // namespace llmscape
