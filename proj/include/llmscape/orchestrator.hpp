#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <span>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "llmscape/actions.hpp"
#include "llmscape/agent_state.hpp"
#include "llmscape/gateway.hpp"
#include "llmscape/mind.hpp"
#include "llmscape/rng.hpp"
#include "llmscape/scenario.hpp"
#include "llmscape/session_log.hpp"
#include "llmscape/world.hpp"

namespace llmscape {

struct TerrainEditInput {
  CellRange region;
  double delta = 0.0;
};

struct UtteranceInput {
  std::string speaker;
  std::string text;
  std::optional<std::string> target;
};

struct ShadowInput {
  ShadowMask mask;
};

using ParticipantInput = std::variant<TerrainEditInput, UtteranceInput, ShadowInput>;

struct StampedInput {
  std::uint64_t arrival = 0;
  ParticipantInput input;
};

/// FIFO of participant inputs. Safe to fill from any thread; drained by
/// the tick loop at the start of each tick.
class InputInbox {
 public:
  InputInbox(int grid_width, int grid_height) : width_(grid_width), height_(grid_height) {}

  /// Returns the arrival order (from 1). Throws Error(input_error) for an
  /// out-of-bounds or empty region, a non-finite delta, empty utterance
  /// text or a mask of the wrong size.
  std::uint64_t enqueue(ParticipantInput input);
  std::vector<StampedInput> drain();
  std::size_t pending() const;

 private:
  mutable std::mutex mutex_;
  std::deque<StampedInput> queue_;
  std::uint64_t next_arrival_ = 1;
  int width_;
  int height_;
};

enum class ConversationState { open, closed };

struct Conversation {
  ConversationId id = 0;
  std::array<std::string, 2> participants;
  std::vector<ConversationTurn> turns;
  ConversationState state = ConversationState::open;
  int max_turns = 8;
  int consecutive_failures = 0;
  Tick opened_tick = 0;

  bool open() const noexcept { return state == ConversationState::open; }
  /// The initiator speaks first, then strict alternation.
  const std::string& next_speaker() const noexcept { return participants[turns.size() % 2]; }
  const std::string& other(const std::string& id) const noexcept {
    return participants[0] == id ? participants[1] : participants[0];
  }
  Tick last_activity() const noexcept { return turns.empty() ? opened_tick : turns.back().tick; }
};

struct TickReport {
  Tick tick = 0;
  std::size_t inputs_processed = 0;
  std::vector<WorldEvent> events;
  std::vector<ActionRequest> actions;
  Seq first_seq = 0;
  Seq last_seq = 0;

  Json to_json() const;
};

class ValidationFailure : public Error {
 public:
  explicit ValidationFailure(ValidationCode code)
      : Error(Errc::validation_error, std::string(to_string(code))), code_(code) {}
  ValidationCode code() const noexcept { return code_; }

 private:
  ValidationCode code_;
};

struct AgentPublicState {
  std::string name;
  Vec2 position = Vec2::Zero();
  Posture posture = Posture::standing;
  std::optional<ActionKind> current_action;
  int tiredness_bucket = 0;
};

struct ConversationSummary {
  ConversationId id = 0;
  std::array<std::string, 2> participants;
  std::optional<ConversationTurn> last_turn;
};

/// Public view of one completed tick: no memories, prompts or plans.
struct StateSnapshot {
  Tick tick = 0;
  Phase phase = Phase::dawn;
  TerrainGrid terrain{1, 1};
  std::vector<AgentPublicState> agents;
  std::vector<ConversationSummary> conversations;
  Seq last_seq = 0;

  /// `stride` > 1 keeps every stride-th row and column.
  Json to_json(int stride = 1) const;
};

/// One running session: world, agents, conversations, log and backend.
/// Only the thread calling tick() mutates it; inbox() may be used from
/// any thread.
class Simulation {
 public:
  Simulation(Scenario scenario, std::shared_ptr<Backend> backend, SessionLog& log);

  /// Runs one tick: clock, inputs and events, agents in roster order,
  /// conversation turns, flush. Backend failures degrade per agent.
  TickReport tick();

  /// Opens a conversation for a talk_to request; the initiator speaks first.
  /// Throws ValidationFailure(target_busy) or (target_unknown).
  Conversation& start_conversation(const ActionRequest& request);
  /// Advances `conversation` by one agent turn.
  void conversation_turn(Conversation& conversation);

  /// Logs a session_end event carrying the tick count and state digest.
  void finish();

  InputInbox& inbox() noexcept { return inbox_; }
  StateSnapshot snapshot() const;
  /// FNV-1a over the canonical terrain + agent serialization.
  std::string state_digest() const;
  Json canonical_state() const;

  const Scenario& scenario() const noexcept { return scenario_; }
  const WorldClock& clock() const noexcept { return clock_; }
  const TerrainGrid& terrain() const noexcept { return terrain_; }
  const std::vector<AgentState>& agents() const noexcept { return agents_; }
  std::vector<AgentState>& agents() noexcept { return agents_; }
  const std::vector<Conversation>& conversations() const noexcept { return conversations_; }
  std::size_t executed_actions() const noexcept { return executed_actions_; }
  SessionLog& log() noexcept { return log_; }

 private:
  WorldView view() const;
  std::vector<std::string> engaged_participants() const;
  AgentState* find_agent(std::string_view id);
  void process_inputs(std::vector<WorldEvent>& events, TickReport& report);
  void handle_utterance(const UtteranceInput& input, std::vector<WorldEvent>& events);
  void run_agent(AgentState& agent, std::span<const WorldEvent> events, TickReport& report);
  void begin_action(AgentState& agent, ActionRequest request, TickReport& report);
  void apply_terrain_change(const TerrainChange& change, const std::string& actor);
  void add_turn(Conversation& conversation, const std::string& speaker, const std::string& text);
  void close_conversation(Conversation& conversation, std::string_view reason);
  void emit_event(const WorldEvent& event, const std::string& actor);
  void log_error(const std::string& actor, const Error& error, Json context = nullptr);
  void reflect(AgentState& agent, bool forced);

  Scenario scenario_;
  std::shared_ptr<Backend> backend_;
  SessionLog& log_;
  TerrainGrid terrain_;
  WorldClock clock_;
  std::vector<AgentState> agents_;
  std::vector<Conversation> conversations_;
  InputInbox inbox_;
  SessionRng rng_;
  std::vector<WorldEvent> pending_events_;
  std::vector<std::string> engaged_;
  bool started_ = false;
  std::size_t executed_actions_ = 0;
  ConversationId next_conversation_ = 1;
  bool finished_ = false;
};

/// Backend for a scenario run: the scripted backend from `script_path`,
/// else from the scenario's own script, else an empty script.
std::shared_ptr<Backend> make_scripted_backend(const Scenario& scenario,
                                               const std::optional<std::filesystem::path>& script_path);

struct SessionResult {
  Tick ticks = 0;
  std::string digest;
  std::size_t executed_actions = 0;
};

/// Logs session_start, runs `ticks` ticks, then finish().
SessionResult run_session(Simulation& simulation, Tick ticks);

class ReplayError : public Error {
 public:
  ReplayError(Seq seq, const std::string& message)
      : Error(Errc::replay_divergence, message), seq_(seq) {}
  /// First seq whose line differs (or is missing).
  Seq seq() const noexcept { return seq_; }

 private:
  Seq seq_;
};

struct ReplayResult {
  Tick ticks = 0;
  std::size_t lines = 0;
  std::string digest;
};

/// Re-runs the session recorded in `log_file` (participant inputs are fed
/// back from the log) and checks that it reproduces the file byte for byte
/// and ends in the recorded state digest. Throws ReplayError on divergence.
ReplayResult replay(const std::filesystem::path& log_file, const Scenario& scenario,
                    const std::optional<std::filesystem::path>& script_path);

}  // namespace llmscape
