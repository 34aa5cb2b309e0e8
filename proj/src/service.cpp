#include "llmscape/service.hpp"

#include <algorithm>
#include <charconv>
#include <list>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace llmscape {

// --- session host -----------------------------------------------------------------

SessionHost::SessionHost(Scenario scenario, std::shared_ptr<Backend> backend, SessionLog& log,
                         HostOptions options)
    : scenario_(scenario),
      log_(log),
      simulation_(std::move(scenario), std::move(backend), log),
      options_(options) {
  publish();
}

SessionHost::~SessionHost() { stop(); }

void SessionHost::start() {
  if (running_ || thread_.joinable()) return;
  stop_requested_ = false;
  running_ = true;
  thread_ = std::thread([this] { loop(); });
}

void SessionHost::stop() {
  stop_requested_ = true;
  wait();
}

void SessionHost::wait() {
  if (thread_.joinable()) thread_.join();
}

void SessionHost::loop() {
  auto next = std::chrono::steady_clock::now();
  while (!stop_requested_) {
    if (options_.max_ticks && simulation_.clock().tick >= *options_.max_ticks) break;
    simulation_.tick();
    publish();
    if (options_.tick_interval.count() > 0) {
      next += options_.tick_interval;
      std::this_thread::sleep_until(next);
    }
  }
  simulation_.finish();
  {
    std::lock_guard lock(snapshot_mutex_);
    result_ = SessionResult{simulation_.clock().tick, simulation_.state_digest(), simulation_.executed_actions()};
  }
  publish();
  log_.close();
  running_ = false;
}

void SessionHost::publish() {
  auto snapshot = std::make_shared<const StateSnapshot>(simulation_.snapshot());
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const StateSnapshot> SessionHost::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

std::uint64_t SessionHost::enqueue(ParticipantInput input) { return simulation_.inbox().enqueue(std::move(input)); }

std::optional<SessionResult> SessionHost::result() const {
  std::lock_guard lock(snapshot_mutex_);
  return result_;
}

// --- request routing --------------------------------------------------------------

namespace {

HttpReply json_reply(int status, const Json& body) { return {status, "application/json", canonical_json(body)}; }

HttpReply error_reply(int status, std::string_view code, std::string_view message) {
  return json_reply(status, {{"error", code}, {"message", message}});
}

std::optional<long long> query_number(std::string_view target, std::string_view key) {
  const auto question = target.find('?');
  if (question == std::string_view::npos) return std::nullopt;
  const std::string query(target.substr(question + 1));
  std::size_t begin = 0;
  while (begin <= query.size()) {
    std::size_t end = query.find('&', begin);
    if (end == std::string::npos) end = query.size();
    const std::string_view pair(query.data() + begin, end - begin);
    const auto eq = pair.find('=');
    if (eq != std::string_view::npos && pair.substr(0, eq) == key) {
      long long value = 0;
      const std::string_view digits = pair.substr(eq + 1);
      const auto [last, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
      if (ec == std::errc() && last == digits.data() + digits.size()) return value;
      return std::nullopt;
    }
    begin = end + 1;
  }
  return std::nullopt;
}

ParticipantInput parse_input(std::string_view path, const Json& body, const Scenario& scenario) {
  if (!body.is_object()) throw Error(Errc::input_error, "body must be a JSON object");
  if (path == "/terrain") {
    if (!body.contains("region") || !body.contains("delta") || !body["delta"].is_number())
      throw Error(Errc::input_error, "expected {region, delta}");
    return TerrainEditInput{cell_range_from_json(body["region"]), body["delta"].get<double>()};
  }
  if (path == "/utterance") {
    if (!body.contains("text") || !body["text"].is_string()) throw Error(Errc::input_error, "expected {text}");
    UtteranceInput input{body.value("speaker", "visitor"), body["text"].get<std::string>(), std::nullopt};
    if (body.contains("target") && !body["target"].is_null()) {
      if (!body["target"].is_string()) throw Error(Errc::input_error, "target must be a string");
      input.target = body["target"].get<std::string>();
    }
    return input;
  }
  // /shadow
  if (!body.contains("cells") || !body["cells"].is_array()) throw Error(Errc::input_error, "expected {cells}");
  ShadowInput input{ShadowMask::Constant(scenario.height, scenario.width, false)};
  for (const auto& cell : body["cells"]) {
    if (!cell.is_array() || cell.size() != 2 || !cell[0].is_number_integer() || !cell[1].is_number_integer())
      throw Error(Errc::input_error, "cells are [x, y] pairs");
    const int x = cell[0].get<int>();
    const int y = cell[1].get<int>();
    if (x < 0 || y < 0 || x >= scenario.width || y >= scenario.height)
      throw Error(Errc::input_error, "shadow cell outside the terrain");
    input.mask(y, x) = true;
  }
  return input;
}

}  // namespace

Seq parse_since(std::string_view target) {
  const auto since = query_number(target, "since");
  return since && *since > 0 ? static_cast<Seq>(*since) : 0;
}

HttpReply handle_request(SessionHost& host, std::string_view method, std::string_view target,
                         std::string_view body) {
  const std::string_view path = target.substr(0, target.find('?'));
  const bool get = method == "GET";
  const bool post = method == "POST";

  if (path == "/state") {
    if (!get) return error_reply(405, "method_not_allowed", "use GET");
    const auto snapshot = host.snapshot();
    if (!snapshot) return error_reply(503, "unavailable", "no session");
    const auto stride = query_number(target, "stride").value_or(1);
    if (stride < 1 || stride > 1024) return error_reply(400, "input_error", "stride must be 1..1024");
    return json_reply(200, snapshot->to_json(static_cast<int>(stride)));
  }
  if (path == "/log/summary") {
    if (!get) return error_reply(405, "method_not_allowed", "use GET");
    return json_reply(200, to_json(summarize_lines(host.log().lines())));
  }
  if (path == "/events") {
    if (!get) return error_reply(405, "method_not_allowed", "use GET");
    std::string text;
    for (const auto& entry : host.log().entries_since(parse_since(target))) {
      text += serialize(entry);
      text += '\n';
    }
    return {200, "application/x-ndjson", std::move(text)};
  }
  if (path == "/terrain" || path == "/utterance" || path == "/shadow") {
    if (!post) return error_reply(405, "method_not_allowed", "use POST");
    if (!host.running()) return error_reply(503, "unavailable", "session is not running");
    const Json parsed = Json::parse(body.begin(), body.end(), nullptr, false);
    if (parsed.is_discarded()) return error_reply(400, "input_error", "body is not valid JSON");
    try {
      const std::uint64_t arrival = host.enqueue(parse_input(path, parsed, host.scenario()));
      return json_reply(202, {{"accepted", true}, {"arrival", arrival}});
    } catch (const Error& e) {
      return error_reply(400, to_string(e.code()), e.what());
    } catch (const Json::exception& e) {
      return error_reply(400, "input_error", e.what());
    }
  }
  return error_reply(404, "not_found", "no such endpoint");
}

// --- server -----------------------------------------------------------------------

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

struct ApiServer::Impl {
  SessionHost& host;
  net::io_context io;
  tcp::acceptor acceptor{io};
  std::thread accept_thread;
  std::atomic<bool> stopping{false};
  std::mutex mutex;
  std::list<std::shared_ptr<tcp::socket>> sockets;
  struct Worker {
    std::thread thread;
    std::shared_ptr<std::atomic<bool>> done;
  };
  std::list<Worker> workers;

  explicit Impl(SessionHost& h) : host(h) {}

  void accept_loop() {
    while (!stopping) {
      auto socket = std::make_shared<tcp::socket>(io);
      beast::error_code ec;
      acceptor.accept(*socket, ec);
      if (stopping) return;
      if (ec) continue;
      std::lock_guard lock(mutex);
      reap();
      sockets.push_back(socket);
      auto done = std::make_shared<std::atomic<bool>>(false);
      workers.push_back({std::thread([this, socket, done] {
                           serve(socket);
                           *done = true;
                         }),
                         done});
    }
  }

  // Caller holds `mutex`.
  void reap() {
    for (auto it = workers.begin(); it != workers.end();) {
      if (*it->done) {
        it->thread.join();
        it = workers.erase(it);
      } else {
        ++it;
      }
    }
  }

  void stream(websocket::stream<tcp::socket&>& ws, Seq since) {
    ws.text(true);
    Seq last = since;
    SessionLog& log = host.log();
    while (!stopping) {
      for (const auto& entry : log.entries_since(last)) {
        ws.write(net::buffer(serialize(entry)));
        last = entry.seq;
      }
      if (log.closed() && log.last_seq() <= last) break;
      log.wait_for_entries(last, std::chrono::milliseconds(200));
    }
    beast::error_code ec;
    ws.close(websocket::close_code::normal, ec);
  }

  void serve(const std::shared_ptr<tcp::socket>& socket) {
    beast::error_code ec;
    beast::flat_buffer buffer;
    while (!stopping) {
      http::request_parser<http::string_body> parser;
      parser.body_limit(1 << 20);
      http::read(*socket, buffer, parser, ec);
      if (ec) break;
      auto request = parser.release();
      const std::string target(request.target());
      if (websocket::is_upgrade(request) && target.substr(0, target.find('?')) == "/events") {
        try {
          websocket::stream<tcp::socket&> ws(*socket);
          ws.accept(request);
          stream(ws, parse_since(target));
        } catch (const beast::system_error&) {
          // client went away
        }
        break;
      }
      const HttpReply reply = handle_request(host, std::string(request.method_string()), target, request.body());
      http::response<http::string_body> response{static_cast<http::status>(reply.status), request.version()};
      response.set(http::field::content_type, reply.content_type);
      response.set(http::field::access_control_allow_origin, "*");
      response.keep_alive(request.keep_alive());
      response.body() = reply.body;
      response.prepare_payload();
      http::write(*socket, response, ec);
      if (ec || !response.keep_alive()) break;
    }
    socket->shutdown(tcp::socket::shutdown_both, ec);
    std::lock_guard lock(mutex);
    sockets.remove(socket);
  }
};

ApiServer::ApiServer(SessionHost& host, std::string address, unsigned short port)
    : impl_(std::make_unique<Impl>(host)) {
  beast::error_code ec;
  const auto ip = net::ip::make_address(address, ec);
  if (ec) throw Error(Errc::configuration_error, "bad listen address " + address);
  const tcp::endpoint endpoint{ip, port};
  impl_->acceptor.open(endpoint.protocol(), ec);
  if (!ec) impl_->acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) impl_->acceptor.bind(endpoint, ec);
  if (!ec) impl_->acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) throw Error(Errc::configuration_error, "cannot listen on " + address + ":" + std::to_string(port) + ": " + ec.message());
  port_ = impl_->acceptor.local_endpoint().port();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::start() {
  if (impl_->accept_thread.joinable()) return;
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

void ApiServer::stop() {
  if (impl_->stopping.exchange(true)) return;
  beast::error_code ec;
  // Wake the blocking accept() with a connection, then close the acceptor.
  if (impl_->accept_thread.joinable()) {
    tcp::socket poke(impl_->io);
    const auto local = impl_->acceptor.local_endpoint(ec);
    const auto address = local.address().is_unspecified() ? net::ip::address(net::ip::make_address("127.0.0.1"))
                                                           : local.address();
    poke.connect({address, port_}, ec);
    impl_->accept_thread.join();
  }
  impl_->acceptor.close(ec);
  std::list<Impl::Worker> workers;
  {
    std::lock_guard lock(impl_->mutex);
    for (auto& socket : impl_->sockets) socket->shutdown(tcp::socket::shutdown_both, ec);
    workers.swap(impl_->workers);
  }
  for (auto& worker : workers) worker.thread.join();
}

}  // namespace llmscape
