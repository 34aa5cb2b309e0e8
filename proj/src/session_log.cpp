#include "llmscape/session_log.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "llmscape/catalogue.hpp"

namespace llmscape {

std::string_view to_string(LogCategory category) noexcept {
  switch (category) {
    case LogCategory::speech: return "speech";
    case LogCategory::contemplation: return "contemplation";
    case LogCategory::planning: return "planning";
    case LogCategory::action: return "action";
    case LogCategory::event: return "event";
    case LogCategory::error: return "error";
  }
  return "event";
}

std::optional<LogCategory> category_from_string(std::string_view name) noexcept {
  for (auto category : {LogCategory::speech, LogCategory::contemplation, LogCategory::planning,
                        LogCategory::action, LogCategory::event, LogCategory::error})
    if (to_string(category) == name) return category;
  return std::nullopt;
}

namespace {

constexpr std::array kEventKinds = {
    "tremor",       "shadow",      "utterance",           "ambient",
    "terrain_edit", "shadow_mask", "conversation_opened", "conversation_closed",
    "session_start", "session_end",
};

[[noreturn]] void reject(LogCategory category, const std::string& why) {
  throw Error(Errc::log_rejected, std::string(to_string(category)) + " payload: " + why);
}

void require_text(LogCategory category, const Json& payload, const char* field, bool non_empty) {
  if (!payload.contains(field) || !payload[field].is_string())
    reject(category, std::string("'") + field + "' must be a string");
  if (non_empty && payload[field].get_ref<const std::string&>().empty())
    reject(category, std::string("'") + field + "' must not be empty");
}

void require_one_of(LogCategory category, const Json& payload, const char* field,
                    std::initializer_list<std::string_view> allowed) {
  require_text(category, payload, field, true);
  const auto& value = payload[field].get_ref<const std::string&>();
  if (std::find(allowed.begin(), allowed.end(), value) == allowed.end())
    reject(category, std::string("unexpected ") + field + " '" + value + "'");
}

void require_action(LogCategory category, const Json& value, const char* what) {
  if (!value.is_string() || !action_from_string(value.get<std::string>()))
    reject(category, std::string(what) + " is not a catalogue action");
}

}  // namespace

void validate_payload(LogCategory category, const Json& payload) {
  if (!payload.is_object()) reject(category, "not an object");
  switch (category) {
    case LogCategory::speech:
      require_text(category, payload, "text", true);
      require_text(category, payload, "listener", true);
      if (!payload.contains("conversation") || !payload["conversation"].is_number_integer())
        reject(category, "'conversation' must be an integer");
      break;
    case LogCategory::contemplation:
      require_one_of(category, payload, "kind", {"observation", "reflection"});
      require_text(category, payload, "text", true);
      break;
    case LogCategory::planning: {
      require_one_of(category, payload, "kind", {"formulate", "adapt"});
      require_text(category, payload, "goal", false);
      if (!payload.contains("steps") || !payload["steps"].is_array() || payload["steps"].empty())
        reject(category, "'steps' must be a non-empty array");
      for (const auto& step : payload["steps"]) {
        if (!step.is_object() || !step.contains("action")) reject(category, "step without action");
        require_action(category, step["action"], "step action");
      }
      if (!payload.contains("cursor") || !payload["cursor"].is_number_integer() ||
          payload["cursor"].get<long long>() < 0)
        reject(category, "'cursor' must be a nonnegative integer");
      break;
    }
    case LogCategory::action:
      if (!payload.contains("action")) reject(category, "missing 'action'");
      require_action(category, payload["action"], "'action'");
      if (!payload.contains("duration") || !payload["duration"].is_number_integer() ||
          payload["duration"].get<long long>() < 1)
        reject(category, "'duration' must be a positive integer");
      break;
    case LogCategory::event: {
      require_text(category, payload, "kind", true);
      const auto& kind = payload["kind"].get_ref<const std::string&>();
      if (std::find(kEventKinds.begin(), kEventKinds.end(), kind) == kEventKinds.end())
        reject(category, "unknown event kind '" + kind + "'");
      break;
    }
    case LogCategory::error:
      require_text(category, payload, "code", true);
      require_text(category, payload, "message", false);
      break;
  }
}

std::string serialize(const LogEntry& entry) {
  return canonical_json({{"seq", entry.seq},
                         {"tick", entry.tick},
                         {"actor", entry.actor},
                         {"category", to_string(entry.category)},
                         {"payload", entry.payload}});
}

LogEntry parse_log_line(std::string_view line) {
  const Json j = Json::parse(line.begin(), line.end(), nullptr, false);
  auto fail = [](const std::string& why) -> LogEntry { throw Error(Errc::parse_error, why); };
  if (j.is_discarded() || !j.is_object()) return fail("log line is not a JSON object");
  if (!j.contains("seq") || !j["seq"].is_number_unsigned()) return fail("bad seq");
  if (!j.contains("tick") || !j["tick"].is_number_integer()) return fail("bad tick");
  if (!j.contains("actor") || !j["actor"].is_string()) return fail("bad actor");
  if (!j.contains("category") || !j["category"].is_string()) return fail("bad category");
  const auto category = category_from_string(j["category"].get<std::string>());
  if (!category) return fail("unknown category");
  if (!j.contains("payload")) return fail("missing payload");

  LogEntry entry;
  entry.seq = j["seq"].get<Seq>();
  entry.tick = j["tick"].get<Tick>();
  entry.actor = j["actor"].get<std::string>();
  entry.category = *category;
  entry.payload = j["payload"];
  try {
    validate_payload(entry.category, entry.payload);
  } catch (const Error& e) {
    return fail(e.what());
  }
  return entry;
}

SessionLog::SessionLog(const std::filesystem::path& path) : out_(path, std::ios::trunc) {
  if (!out_) throw Error(Errc::configuration_error, "cannot open log file " + path.string());
}

void SessionLog::append_locked(LogEntry entry, std::string line) {
  if (out_.is_open()) out_ << line << '\n';
  entries_.push_back(std::move(entry));
  lines_.push_back(std::move(line));
  appended_.notify_all();
}

void SessionLog::append(LogEntry entry) {
  std::lock_guard lock(mutex_);
  const Seq expected = entries_.empty() ? 1 : entries_.back().seq + 1;
  if (entry.seq != expected)
    throw Error(Errc::log_rejected, "seq " + std::to_string(entry.seq) + " where " +
                                        std::to_string(expected) + " was expected");
  if (entry.actor.empty()) throw Error(Errc::log_rejected, "entry without actor");
  validate_payload(entry.category, entry.payload);
  std::string line = serialize(entry);
  append_locked(std::move(entry), std::move(line));
}

LogEntry SessionLog::emit(Tick tick, std::string actor, LogCategory category, Json payload) {
  std::lock_guard lock(mutex_);
  LogEntry entry;
  entry.seq = entries_.empty() ? 1 : entries_.back().seq + 1;
  entry.tick = tick;
  entry.actor = actor.empty() ? "world" : std::move(actor);
  entry.category = category;
  try {
    validate_payload(category, payload);
    entry.payload = std::move(payload);
  } catch (const Error& e) {
    entry.category = LogCategory::error;
    entry.payload = {{"code", to_string(Errc::log_rejected)},
                     {"message", e.what()},
                     {"rejected_category", to_string(category)}};
  }
  std::string line = serialize(entry);
  append_locked(entry, std::move(line));
  return entry;
}

void SessionLog::flush() {
  std::lock_guard lock(mutex_);
  if (out_.is_open()) out_.flush();
}

Seq SessionLog::last_seq() const {
  std::lock_guard lock(mutex_);
  return entries_.empty() ? 0 : entries_.back().seq;
}

std::size_t SessionLog::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

std::vector<LogEntry> SessionLog::entries_since(Seq seq) const {
  std::lock_guard lock(mutex_);
  // seq n lives at index n - 1.
  const std::size_t from = std::min<std::size_t>(seq, entries_.size());
  return {entries_.begin() + static_cast<std::ptrdiff_t>(from), entries_.end()};
}

std::vector<std::string> SessionLog::lines() const {
  std::lock_guard lock(mutex_);
  return lines_;
}

bool SessionLog::wait_for_entries(Seq seq, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  appended_.wait_for(lock, timeout, [&] { return entries_.size() > seq || closed_; });
  return entries_.size() > seq;
}

void SessionLog::close() {
  std::lock_guard lock(mutex_);
  closed_ = true;
  if (out_.is_open()) out_.flush();
  appended_.notify_all();
}

bool SessionLog::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

LogSummary summarize_lines(const std::vector<std::string>& lines) {
  LogSummary summary;
  for (auto category : {LogCategory::speech, LogCategory::contemplation, LogCategory::planning,
                        LogCategory::action, LogCategory::event, LogCategory::error})
    summary.by_category[std::string(to_string(category))] = 0;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    LogEntry entry;
    try {
      entry = parse_log_line(lines[i]);
    } catch (const Error& e) {
      throw SummaryError(i + 1, "line " + std::to_string(i + 1) + ": " + e.what());
    }
    ++summary.lines;
    ++summary.by_category[std::string(to_string(entry.category))];
    ++summary.by_actor[entry.actor];
    if (entry.category == LogCategory::action)
      ++summary.by_action[entry.payload["action"].get<std::string>()];
  }
  return summary;
}

LogSummary summarize(const std::filesystem::path& log_file) {
  std::ifstream in(log_file);
  if (!in) throw SummaryError(0, "cannot open " + log_file.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  return summarize_lines(lines);
}

Json to_json(const LogSummary& summary) {
  return {{"lines", summary.lines},
          {"by_category", summary.by_category},
          {"by_actor", summary.by_actor},
          {"by_action", summary.by_action}};
}

}  // namespace llmscape
