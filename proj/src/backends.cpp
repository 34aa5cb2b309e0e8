#include "llmscape/backends.hpp"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

#include <curl/curl.h>

namespace llmscape {

// --- scripted ---------------------------------------------------------------

void ScriptedBackend::add(std::string agent, int step, ScriptRecord record) {
  std::lock_guard lock(mutex_);
  script_[{std::move(agent), step}] = std::move(record);
}

ScriptedBackend ScriptedBackend::from_string(std::string_view text) {
  ScriptedBackend backend;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const Json j = Json::parse(line, nullptr, false);
    auto fail = [&](const std::string& why) {
      throw Error(Errc::configuration_error,
                  "script line " + std::to_string(number) + ": " + why);
    };
    if (j.is_discarded() || !j.is_object()) fail("not a JSON object");
    if (!j.contains("agent") || !j["agent"].is_string()) fail("missing agent");
    if (!j.contains("step") || !j["step"].is_number_integer() || j["step"].get<int>() < 1)
      fail("missing or invalid step");

    ScriptRecord record;
    if (j.contains("error")) {
      record.fail = true;
    } else if (j.contains("tool_calls")) {
      if (!j["tool_calls"].is_array()) fail("tool_calls is not an array");
      std::vector<ToolCall> calls;
      for (const auto& element : j["tool_calls"]) {
        if (!element.is_object() || !element.contains("name") || !element["name"].is_string())
          fail("tool call without a name");
        calls.push_back({element["name"].get<std::string>(), element.value("arguments", Json::object())});
      }
      record.reply = ModelReply::calls(std::move(calls));
    } else if (j.contains("text")) {
      const Json& text = j["text"];
      record.reply = ModelReply::text(text.is_string() ? text.get<std::string>() : text.dump());
    } else {
      fail("needs one of text, tool_calls or error");
    }
    const auto key = std::make_pair(j["agent"].get<std::string>(), j["step"].get<int>());
    if (backend.script_.count(key)) fail("duplicate (agent, step)");
    backend.script_[key] = std::move(record);
  }
  return backend;
}

ScriptedBackend ScriptedBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::configuration_error, "cannot open script " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return from_string(text.str());
}

ModelReply ScriptedBackend::complete(const PromptContext& context) {
  std::lock_guard lock(mutex_);
  const int step = ++counters_[context.agent_id];
  const auto it = script_.find({context.agent_id, step});
  if (it == script_.end()) return ModelReply::calls({{"wait", Json::object()}});
  if (it->second.fail)
    throw Error(Errc::backend_error,
                "scripted failure for " + context.agent_id + " step " + std::to_string(step));
  return it->second.reply;
}

int ScriptedBackend::steps_taken(const std::string& agent) const {
  std::lock_guard lock(mutex_);
  const auto it = counters_.find(agent);
  return it == counters_.end() ? 0 : it->second;
}

// --- live -------------------------------------------------------------------

LiveBackendConfig LiveBackendConfig::from_environment() {
  LiveBackendConfig config;
  const char* url = std::getenv("LLMSCAPE_API_URL");
  if (url == nullptr || *url == '\0')
    throw Error(Errc::configuration_error, "LLMSCAPE_API_URL is not set");
  config.url = url;
  if (const char* key = std::getenv("LLMSCAPE_API_KEY")) config.api_key = key;
  if (const char* model = std::getenv("LLMSCAPE_MODEL"); model != nullptr && *model != '\0')
    config.model = model;
  return config;
}

LiveBackend::LiveBackend(LiveBackendConfig config) : config_(std::move(config)) {
  static const bool initialised = [] { return curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK; }();
  if (!initialised) throw Error(Errc::configuration_error, "libcurl initialisation failed");
}

namespace {

Json parameter_schema(const ToolParameter& parameter) {
  switch (parameter.type) {
    case ParamType::string:
    case ParamType::entity:
      return {{"type", "string"}, {"description", parameter.description}};
    case ParamType::number: return {{"type", "number"}, {"description", parameter.description}};
    case ParamType::integer: return {{"type", "integer"}, {"description", parameter.description}};
    case ParamType::coordinates:
      return {{"type", "object"},
              {"description", parameter.description},
              {"properties", {{"x", {{"type", "number"}}}, {"y", {{"type", "number"}}}}},
              {"required", {"x", "y"}}};
  }
  return {{"type", "string"}};
}

std::size_t collect(char* data, std::size_t size, std::size_t count, void* sink) {
  static_cast<std::string*>(sink)->append(data, size * count);
  return size * count;
}

}  // namespace

Json LiveBackend::request_body(const PromptContext& context, const std::string& model) {
  Json messages = Json::array();
  messages.push_back({{"role", "system"}, {"content", context.system_text}});
  messages.push_back({{"role", "user"}, {"content", context.render_user_text()}});
  Json body = {{"model", model}, {"messages", messages}};
  if (!context.tool_catalogue.empty()) {
    Json tools = Json::array();
    for (const auto& tool : context.tool_catalogue) {
      Json properties = Json::object();
      Json required = Json::array();
      for (const auto& parameter : tool.parameters) {
        properties[parameter.name] = parameter_schema(parameter);
        if (parameter.required) required.push_back(parameter.name);
      }
      tools.push_back({{"type", "function"},
                       {"function",
                        {{"name", tool.name},
                         {"description", tool.description},
                         {"parameters",
                          {{"type", "object"}, {"properties", properties}, {"required", required}}}}}});
    }
    body["tools"] = tools;
    body["tool_choice"] = "required";
  }
  return body;
}

ModelReply LiveBackend::parse_response(const Json& body) {
  try {
    const Json& message = body.at("choices").at(0).at("message");
    if (message.contains("tool_calls") && message["tool_calls"].is_array() &&
        !message["tool_calls"].empty()) {
      std::vector<ToolCall> calls;
      for (const auto& item : message["tool_calls"]) {
        const Json& function = item.contains("function") ? item["function"] : item;
        Json element = {{"name", function.at("name")}};
        if (function.contains("arguments")) element["arguments"] = function["arguments"];
        try {
          calls.push_back(tool_call_from_json(element));
        } catch (const ToolParseError&) {
          // Keep the name so the caller's validation reports it and retries.
          calls.push_back({function.at("name").get<std::string>(), Json()});
        }
      }
      return ModelReply::calls(std::move(calls));
    }
    const Json& content = message.at("content");
    return ModelReply::text(content.is_string() ? content.get<std::string>() : std::string());
  } catch (const Json::exception& e) {
    throw Error(Errc::backend_error, std::string("unexpected completion response: ") + e.what());
  }
}

std::string LiveBackend::post(const std::string& body) {
  std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), curl_easy_cleanup);
  if (!curl) throw Error(Errc::backend_error, "curl_easy_init failed");

  std::unique_ptr<curl_slist, decltype(&curl_slist_free_all)> headers(nullptr, curl_slist_free_all);
  headers.reset(curl_slist_append(headers.release(), "Content-Type: application/json"));
  if (!config_.api_key.empty())
    headers.reset(curl_slist_append(headers.release(), ("Authorization: Bearer " + config_.api_key).c_str()));

  std::string response;
  curl_easy_setopt(curl.get(), CURLOPT_URL, config_.url.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_HTTPHEADER, headers.get());
  curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDS, body.c_str());
  curl_easy_setopt(curl.get(), CURLOPT_POSTFIELDSIZE, static_cast<long>(body.size()));
  curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT_MS, static_cast<long>(config_.timeout.count()));
  curl_easy_setopt(curl.get(), CURLOPT_NOSIGNAL, 1L);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, collect);
  curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &response);

  const CURLcode rc = curl_easy_perform(curl.get());
  if (rc != CURLE_OK) throw Error(Errc::backend_error, std::string("transport: ") + curl_easy_strerror(rc));
  long status = 0;
  curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &status);
  if (status < 200 || status >= 300)
    throw Error(Errc::backend_error, "HTTP status " + std::to_string(status));
  return response;
}

ModelReply LiveBackend::complete(const PromptContext& context) {
  const std::string body = request_body(context, config_.model).dump();
  auto delay = config_.backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      const Json response = Json::parse(post(body), nullptr, false);
      if (response.is_discarded()) throw Error(Errc::backend_error, "completion response is not JSON");
      return parse_response(response);
    } catch (const Error&) {
      if (attempt >= config_.retries) throw;
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
}

std::optional<int> LiveBackend::rate_importance(std::string_view agent_id, std::string_view text) {
  if (!config_.rate_importance) return std::nullopt;
  PromptContext context;
  context.agent_id = std::string(agent_id);
  context.system_text =
      "Rate the poignancy of a memory on a scale from 1 (mundane) to 10 (life-changing). "
      "Answer with the number only.";
  context.world_context = "Memory: " + std::string(text);
  try {
    const ModelReply reply = complete(context);
    if (!reply.is_text()) return std::nullopt;
    const std::string& answer = reply.as_text();
    const auto digit = answer.find_first_of("0123456789");
    if (digit == std::string::npos) return std::nullopt;
    const int value = std::atoi(answer.c_str() + digit);
    if (value < 1 || value > 10) return std::nullopt;
    return value;
  } catch (const Error&) {
    return std::nullopt;
  }
}

}  // namespace llmscape
