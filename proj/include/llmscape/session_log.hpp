#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "llmscape/canonical.hpp"
#include "llmscape/error.hpp"
#include "llmscape/world.hpp"

namespace llmscape {

enum class LogCategory { speech, contemplation, planning, action, event, error };
std::string_view to_string(LogCategory category) noexcept;
std::optional<LogCategory> category_from_string(std::string_view name) noexcept;

using Seq = std::uint64_t;

struct LogEntry {
  Seq seq = 0;
  Tick tick = 0;
  std::string actor;
  LogCategory category = LogCategory::event;
  Json payload = Json::object();
};

/// Throws Error(log_rejected) when `payload` does not match the schema of
/// `category`.
void validate_payload(LogCategory category, const Json& payload);

/// The canonical JSONL line for `entry`, without the trailing newline.
std::string serialize(const LogEntry& entry);
/// Throws Error(parse_error) for anything that is not a well-formed entry.
LogEntry parse_log_line(std::string_view line);

/// Append-only session corpus. Single writer, any number of readers.
/// Every accepted entry is written as one line to the optional file and
/// kept in memory for streaming.
class SessionLog {
 public:
  SessionLog() = default;
  /// Truncates `path`.
  explicit SessionLog(const std::filesystem::path& path);

  SessionLog(const SessionLog&) = delete;
  SessionLog& operator=(const SessionLog&) = delete;

  /// Appends an entry whose seq is exactly last_seq() + 1 and whose payload
  /// validates. Throws Error(log_rejected) otherwise, leaving the log as is.
  void append(LogEntry entry);

  /// Appends with the next seq. A payload that fails validation is replaced
  /// by an `error` entry describing the rejection, which is returned.
  LogEntry emit(Tick tick, std::string actor, LogCategory category, Json payload);

  void flush();

  Seq last_seq() const;
  std::size_t size() const;
  std::vector<LogEntry> entries_since(Seq seq) const;
  std::vector<std::string> lines() const;

  /// Blocks until an entry with seq > `seq` exists, the log is closed, or
  /// `timeout` passes. Returns true if such an entry exists.
  bool wait_for_entries(Seq seq, std::chrono::milliseconds timeout) const;
  /// Marks the log finished and wakes waiting readers.
  void close();
  bool closed() const;

 private:
  void append_locked(LogEntry entry, std::string line);

  mutable std::mutex mutex_;
  mutable std::condition_variable appended_;
  std::vector<LogEntry> entries_;
  std::vector<std::string> lines_;
  std::ofstream out_;
  bool closed_ = false;
};

struct LogSummary {
  std::size_t lines = 0;
  std::map<std::string, std::size_t> by_category;
  std::map<std::string, std::size_t> by_actor;
  std::map<std::string, std::size_t> by_action;

  bool operator==(const LogSummary&) const = default;
};

class SummaryError : public Error {
 public:
  SummaryError(std::size_t line, const std::string& message)
      : Error(Errc::summary_error, message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Exact counts per category (all six always present), actor and action.
/// Throws SummaryError with the 1-based line number of a malformed line.
LogSummary summarize(const std::filesystem::path& log_file);
LogSummary summarize_lines(const std::vector<std::string>& lines);
Json to_json(const LogSummary& summary);

}  // namespace llmscape
