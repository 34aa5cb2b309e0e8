#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include "llmscape/orchestrator.hpp"

namespace llmscape {

struct HostOptions {
  /// Stop after this many ticks; run until stop() otherwise.
  std::optional<Tick> max_ticks;
  /// Wall-clock pause between ticks; zero runs headless as fast as possible.
  std::chrono::milliseconds tick_interval{500};
};

/// Owns the tick thread of a session and publishes an immutable snapshot
/// after every tick. All public members are thread-safe.
class SessionHost {
 public:
  SessionHost(Scenario scenario, std::shared_ptr<Backend> backend, SessionLog& log,
              HostOptions options = {});
  ~SessionHost();

  SessionHost(const SessionHost&) = delete;
  SessionHost& operator=(const SessionHost&) = delete;

  void start();
  /// Asks the loop to stop after the current tick and joins it.
  void stop();
  /// Joins a loop that ends on its own (max_ticks).
  void wait();
  bool running() const noexcept { return running_; }

  std::shared_ptr<const StateSnapshot> snapshot() const;
  std::uint64_t enqueue(ParticipantInput input);
  SessionLog& log() noexcept { return log_; }
  const Scenario& scenario() const noexcept { return scenario_; }
  std::optional<SessionResult> result() const;

 private:
  void loop();
  void publish();

  Scenario scenario_;
  SessionLog& log_;
  Simulation simulation_;
  HostOptions options_;
  std::thread thread_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stop_requested_{false};
  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const StateSnapshot> snapshot_;
  std::optional<SessionResult> result_;
};

struct HttpReply {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Routes one plain HTTP request (everything except the websocket upgrade
/// of /events). `target` is the request path including any query string.
HttpReply handle_request(SessionHost& host, std::string_view method, std::string_view target,
                         std::string_view body);

/// Parses "since=<n>" from a target like "/events?since=12"; 0 when absent.
Seq parse_since(std::string_view target);

/// HTTP + websocket server on one port. Plain requests go to
/// handle_request; a websocket upgrade on /events?since=<seq> streams every
/// log entry with a greater seq as one text message each, then follows
/// live appends until the log closes or the client disconnects.
class ApiServer {
 public:
  ApiServer(SessionHost& host, std::string address, unsigned short port);
  ~ApiServer();

  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  void start();
  void stop();
  /// Bound port (useful when constructed with port 0).
  unsigned short port() const noexcept { return port_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  unsigned short port_ = 0;
};

}  // namespace llmscape
