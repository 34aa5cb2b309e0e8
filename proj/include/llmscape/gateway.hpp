#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "llmscape/canonical.hpp"
#include "llmscape/error.hpp"
#include "llmscape/memory.hpp"

namespace llmscape {

enum class ParamType { string, number, integer, coordinates, entity };
std::string_view to_string(ParamType type) noexcept;

struct ToolParameter {
  std::string name;
  ParamType type = ParamType::string;
  bool required = true;
  std::string description;
};

struct ToolDescriptor {
  std::string name;
  std::string description;
  std::vector<ToolParameter> parameters;
};

struct ToolCall {
  std::string name;
  Json arguments = Json::object();

  bool operator==(const ToolCall&) const = default;
};

/// Exactly one of free text or a list of tool calls.
struct ModelReply {
  std::variant<std::string, std::vector<ToolCall>> content;

  static ModelReply text(std::string body) { return {std::move(body)}; }
  static ModelReply calls(std::vector<ToolCall> calls) { return {std::move(calls)}; }

  bool is_text() const noexcept { return content.index() == 0; }
  const std::string& as_text() const { return std::get<0>(content); }
  const std::vector<ToolCall>& as_calls() const { return std::get<1>(content); }

  bool operator==(const ModelReply&) const = default;
};

struct ConversationTurn {
  std::string speaker;
  std::string text;
  Tick tick = 0;

  bool operator==(const ConversationTurn&) const = default;
};

/// Everything one completion request sees. Produced by assemble_prompt,
/// which guarantees `estimated_tokens <= token_budget`.
struct PromptContext {
  std::string agent_id;
  std::string system_text;
  std::string world_context;
  std::vector<ScoredMemory> retrieved_memories;
  std::vector<ConversationTurn> conversation_history;
  std::vector<ToolDescriptor> tool_catalogue;
  int token_budget = 0;
  int estimated_tokens = 0;

  /// User-turn text: world context, memories, then history.
  std::string render_user_text() const;
};

/// Approximate token count: ceil(characters / 4).
int estimate_tokens(std::string_view text) noexcept;
std::string render_memory_line(const MemoryRecord& record);
std::string render_turn_line(const ConversationTurn& turn);

struct PromptInputs {
  std::string agent_id;
  std::string system_text;
  std::string world_context;
  std::vector<ScoredMemory> memories;
  std::vector<ConversationTurn> history;
  std::vector<ToolDescriptor> tools;
};

/// Always keeps the system text and world context, then adds memories by
/// rank and recent history turns newest-first while they fit. Stops at the
/// first item that does not fit, so no item is truncated or skipped over.
/// Throws Error(configuration_error) when the mandatory text alone exceeds
/// `budget`.
PromptContext assemble_prompt(PromptInputs inputs, int budget);

/// Model backend. Implementations throw Error(backend_error) on transport
/// failure; callers decide about retries.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual ModelReply complete(const PromptContext& context) = 0;
  /// Optional 1..10 rating; nullopt means "use the heuristic".
  virtual std::optional<int> rate_importance(std::string_view /*agent_id*/,
                                             std::string_view /*text*/) {
    return std::nullopt;
  }
};

enum class ParseErrc { malformed, unknown_tool, missing_argument, invalid_argument, no_calls };
std::string_view to_string(ParseErrc code) noexcept;

class ToolParseError : public Error {
 public:
  ToolParseError(ParseErrc reason, std::string call, const std::string& message)
      : Error(Errc::parse_error, message), reason_(reason), call_(std::move(call)) {}

  ParseErrc reason() const noexcept { return reason_; }
  /// Name (or index) of the offending call; empty for whole-reply errors.
  const std::string& call() const noexcept { return call_; }

 private:
  ParseErrc reason_;
  std::string call_;
};

/// Checks names and argument types of already-structured calls.
std::vector<ToolCall> validate_tool_calls(std::span<const ToolCall> calls,
                                          std::span<const ToolDescriptor> catalogue);

/// Parses a raw reply of the form {"tool_calls":[{"name":..,"arguments":{..}}]},
/// a bare call object, or an array of calls, then validates it.
std::vector<ToolCall> parse_tool_calls(std::string_view raw,
                                       std::span<const ToolDescriptor> catalogue);

Json to_json(const ToolCall& call);
ToolCall tool_call_from_json(const Json& j);
Json to_json(const ModelReply& reply);

}  // namespace llmscape
