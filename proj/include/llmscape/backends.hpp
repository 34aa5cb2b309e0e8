#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "llmscape/gateway.hpp"

namespace llmscape {

struct ScriptRecord {
  bool fail = false;
  ModelReply reply;
};

/// Replays canned replies keyed by (agent, step). Steps count from 1 per
/// agent and advance on every complete() call. Missing steps answer with a
/// `wait` tool call.
///
/// Script format, one JSON object per line:
///   {"agent":"woman","step":1,"tool_calls":[{"name":"rest","arguments":{}}]}
///   {"agent":"woman","step":2,"text":"Good morning."}
///   {"agent":"woman","step":3,"error":"timeout"}
/// A non-string "text" value is passed on as its compact JSON rendering.
/// Blank lines and lines starting with '#' are ignored.
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend() = default;
  ScriptedBackend(ScriptedBackend&& other) noexcept
      : script_(std::move(other.script_)), counters_(std::move(other.counters_)) {}
  static ScriptedBackend from_file(const std::filesystem::path& path);
  static ScriptedBackend from_string(std::string_view text);

  void add(std::string agent, int step, ScriptRecord record);

  ModelReply complete(const PromptContext& context) override;

  int steps_taken(const std::string& agent) const;
  std::size_t size() const noexcept { return script_.size(); }

 private:
  std::map<std::pair<std::string, int>, ScriptRecord> script_;
  std::map<std::string, int> counters_;
  mutable std::mutex mutex_;
};

struct LiveBackendConfig {
  std::string url;
  std::string api_key;
  std::string model = "gpt-4";
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds backoff{1000};
  bool rate_importance = true;

  /// Reads LLMSCAPE_API_URL, LLMSCAPE_API_KEY and optional LLMSCAPE_MODEL.
  /// Throws Error(configuration_error) when the URL is unset.
  static LiveBackendConfig from_environment();
};

/// Chat-completions client (OpenAI-style request/response bodies).
class LiveBackend : public Backend {
 public:
  explicit LiveBackend(LiveBackendConfig config);

  ModelReply complete(const PromptContext& context) override;
  std::optional<int> rate_importance(std::string_view agent_id, std::string_view text) override;

  /// Request body for `context`; exposed for tests.
  static Json request_body(const PromptContext& context, const std::string& model);
  /// Extracts the reply from a response body.
  static ModelReply parse_response(const Json& body);

 private:
  std::string post(const std::string& body);

  LiveBackendConfig config_;
};

}  // namespace llmscape
