#include "llmscape/gateway.hpp"

#include <algorithm>
#include <cmath>

namespace llmscape {

std::string_view to_string(ParamType type) noexcept {
  switch (type) {
    case ParamType::string: return "string";
    case ParamType::number: return "number";
    case ParamType::integer: return "integer";
    case ParamType::coordinates: return "coordinates";
    case ParamType::entity: return "entity";
  }
  return "string";
}

std::string_view to_string(ParseErrc code) noexcept {
  switch (code) {
    case ParseErrc::malformed: return "malformed";
    case ParseErrc::unknown_tool: return "unknown_tool";
    case ParseErrc::missing_argument: return "missing_argument";
    case ParseErrc::invalid_argument: return "invalid_argument";
    case ParseErrc::no_calls: return "no_calls";
  }
  return "malformed";
}

int estimate_tokens(std::string_view text) noexcept {
  return static_cast<int>((text.size() + 3) / 4);
}

std::string render_memory_line(const MemoryRecord& record) {
  return "- (tick " + std::to_string(record.tick) + ") " + record.text;
}

std::string render_turn_line(const ConversationTurn& turn) { return turn.speaker + ": " + turn.text; }

std::string PromptContext::render_user_text() const {
  std::string text = world_context;
  for (const auto& memory : retrieved_memories) text += "\n" + render_memory_line(memory.record);
  for (const auto& turn : conversation_history) text += "\n" + render_turn_line(turn);
  return text;
}

PromptContext assemble_prompt(PromptInputs inputs, int budget) {
  // Costs are summed per item, each item including its separating newline;
  // a sum of ceilings never undercounts the joined text.
  const int mandatory = estimate_tokens(inputs.system_text) + estimate_tokens(inputs.world_context);
  if (budget < mandatory)
    throw Error(Errc::configuration_error, "token budget " + std::to_string(budget) +
                                               " below the mandatory prompt size " +
                                               std::to_string(mandatory));

  PromptContext context;
  context.agent_id = std::move(inputs.agent_id);
  context.system_text = std::move(inputs.system_text);
  context.world_context = std::move(inputs.world_context);
  context.tool_catalogue = std::move(inputs.tools);
  context.token_budget = budget;

  int used = mandatory;
  std::stable_sort(inputs.memories.begin(), inputs.memories.end(), ranks_before);
  for (auto& memory : inputs.memories) {
    const int cost = estimate_tokens("\n" + render_memory_line(memory.record));
    if (used + cost > budget) break;
    used += cost;
    context.retrieved_memories.push_back(std::move(memory));
  }

  std::vector<ConversationTurn> recent;
  for (auto it = inputs.history.rbegin(); it != inputs.history.rend(); ++it) {
    const int cost = estimate_tokens("\n" + render_turn_line(*it));
    if (used + cost > budget) break;
    used += cost;
    recent.push_back(std::move(*it));
  }
  context.conversation_history.assign(std::make_move_iterator(recent.rbegin()),
                                      std::make_move_iterator(recent.rend()));
  context.estimated_tokens = used;
  return context;
}

namespace {

bool is_coordinates(const Json& value) {
  auto finite_number = [](const Json& n) { return n.is_number() && std::isfinite(n.get<double>()); };
  if (value.is_object())
    return value.contains("x") && value.contains("y") && finite_number(value["x"]) &&
           finite_number(value["y"]);
  if (value.is_array()) return value.size() == 2 && finite_number(value[0]) && finite_number(value[1]);
  return false;
}

bool type_checks(ParamType type, const Json& value) {
  switch (type) {
    case ParamType::string: return value.is_string();
    case ParamType::number: return value.is_number() && std::isfinite(value.get<double>());
    case ParamType::integer: return value.is_number_integer();
    case ParamType::coordinates: return is_coordinates(value);
    case ParamType::entity: return value.is_string() && !value.get_ref<const std::string&>().empty();
  }
  return false;
}

// nlohmann's parser recurses per nesting level; refuse pathological input
// before handing it over.
bool nesting_within(std::string_view raw, int limit) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (char c : raw) {
    if (in_string) {
      if (escaped) escaped = false;
      else if (c == '\\') escaped = true;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '[' || c == '{') {
      if (++depth > limit) return false;
    } else if (c == ']' || c == '}') {
      --depth;
    }
  }
  return true;
}

ToolCall call_from_element(const Json& element, std::size_t index) {
  const std::string label = "#" + std::to_string(index);
  if (!element.is_object() || !element.contains("name") || !element["name"].is_string())
    throw ToolParseError(ParseErrc::malformed, label, "tool call " + label + " has no name");
  ToolCall call;
  call.name = element["name"].get<std::string>();
  if (element.contains("arguments")) {
    Json arguments = element["arguments"];
    if (arguments.is_string()) {
      const auto& text = arguments.get_ref<const std::string&>();
      arguments = nesting_within(text, 32) ? Json::parse(text, nullptr, false) : Json(Json::value_t::discarded);
    }
    if (!arguments.is_object())
      throw ToolParseError(ParseErrc::malformed, call.name,
                           "arguments of '" + call.name + "' are not an object");
    call.arguments = std::move(arguments);
  }
  return call;
}

}  // namespace

std::vector<ToolCall> validate_tool_calls(std::span<const ToolCall> calls,
                                          std::span<const ToolDescriptor> catalogue) {
  if (calls.empty()) throw ToolParseError(ParseErrc::no_calls, "", "reply contains no tool call");
  std::vector<ToolCall> valid;
  for (const auto& call : calls) {
    const auto tool = std::find_if(catalogue.begin(), catalogue.end(),
                                   [&](const ToolDescriptor& t) { return t.name == call.name; });
    if (tool == catalogue.end())
      throw ToolParseError(ParseErrc::unknown_tool, call.name, "unknown tool '" + call.name + "'");
    if (!call.arguments.is_object())
      throw ToolParseError(ParseErrc::malformed, call.name,
                           "arguments of '" + call.name + "' are not an object");
    for (const auto& parameter : tool->parameters) {
      if (!call.arguments.contains(parameter.name)) {
        if (parameter.required)
          throw ToolParseError(ParseErrc::missing_argument, call.name,
                               "'" + call.name + "' is missing argument '" + parameter.name + "'");
        continue;
      }
      if (!type_checks(parameter.type, call.arguments[parameter.name]))
        throw ToolParseError(ParseErrc::invalid_argument, call.name,
                             "argument '" + parameter.name + "' of '" + call.name + "' is not " +
                                 std::string(to_string(parameter.type)));
    }
    valid.push_back(call);
  }
  return valid;
}

std::vector<ToolCall> parse_tool_calls(std::string_view raw,
                                       std::span<const ToolDescriptor> catalogue) {
  if (raw.size() > (1u << 16) || !nesting_within(raw, 32))
    throw ToolParseError(ParseErrc::malformed, "", "reply too large or too deeply nested");
  const Json document = Json::parse(raw.begin(), raw.end(), nullptr, false);
  if (document.is_discarded()) throw ToolParseError(ParseErrc::malformed, "", "reply is not JSON");

  const Json* list = nullptr;
  Json single = Json::array();
  if (document.is_object() && document.contains("tool_calls")) {
    list = &document["tool_calls"];
  } else if (document.is_object()) {
    single.push_back(document);
    list = &single;
  } else if (document.is_array()) {
    list = &document;
  }
  if (list == nullptr || !list->is_array())
    throw ToolParseError(ParseErrc::malformed, "", "reply holds no tool call list");

  std::vector<ToolCall> calls;
  for (std::size_t i = 0; i < list->size(); ++i) calls.push_back(call_from_element((*list)[i], i));
  return validate_tool_calls(calls, catalogue);
}

Json to_json(const ToolCall& call) { return {{"name", call.name}, {"arguments", call.arguments}}; }

ToolCall tool_call_from_json(const Json& j) { return call_from_element(j, 0); }

Json to_json(const ModelReply& reply) {
  if (reply.is_text()) return {{"text", reply.as_text()}};
  Json calls = Json::array();
  for (const auto& call : reply.as_calls()) calls.push_back(to_json(call));
  return {{"tool_calls", calls}};
}

}  // namespace llmscape
