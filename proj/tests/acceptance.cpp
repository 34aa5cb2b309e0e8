// Acceptance suite: one PASS/FAIL line per criterion. Tolerances are fixed
// here and must not be relaxed to make a line pass.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "llmscape/backends.hpp"
#include "llmscape/orchestrator.hpp"
#include "llmscape/service.hpp"
#include "oracles.hpp"

using namespace llmscape;

namespace {

constexpr double kRecencyTolerance = 1e-9;
constexpr double kRunSecondsLimit = 10.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  Outcome outcome;
  try {
    outcome = check();
  } catch (const std::exception& e) {
    outcome = {false, std::string("exception: ") + e.what()};
  }
  if (!outcome.pass) ++failures;
  std::cout << (outcome.pass ? "PASS " : "FAIL ") << name << ": " << outcome.detail << std::endl;
}

std::filesystem::path work_path(const std::string& name) { return std::filesystem::path(LLMSCAPE_WORKDIR) / name; }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

class TextBackend : public Backend {
 public:
  explicit TextBackend(std::string text) : text_(std::move(text)) {}
  ModelReply complete(const PromptContext&) override { return ModelReply::text(text_); }

 private:
  std::string text_;
};

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.3f", v);
  return buffer;
}

// 1 ------------------------------------------------------------------------------
Outcome determinism() {
  double slowest = 0.0;
  std::vector<std::string> logs;
  for (int run = 0; run < 2; ++run) {
    const auto log = work_path("acceptance-run" + std::to_string(run) + ".jsonl");
    std::filesystem::remove(log);
    const std::string command = std::string("\"") + LLMSCAPE_CLI +
                                "\" run --scenario default --seed 42 --backend scripted --ticks 500 --headless --log \"" +
                                log.string() + "\" > /dev/null";
    const auto start = std::chrono::steady_clock::now();
    const int status = std::system(command.c_str());
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (status != 0) return {false, "run exited with status " + std::to_string(status)};
    slowest = std::max(slowest, seconds);
    logs.push_back(read_file(log));
  }
  const bool identical = logs[0] == logs[1] && !logs[0].empty();
  return {identical && slowest < kRunSecondsLimit,
          std::string(identical ? "logs byte-identical" : "logs differ") + " (" + std::to_string(logs[0].size()) +
              " bytes), slowest run " + format_double(slowest) + " s"};
}

// 2 ------------------------------------------------------------------------------
Outcome retrieval_oracle() {
  std::mt19937_64 rng(20240601);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int dimension = std::uniform_int_distribution(1, 12)(rng);
    MemoryStore store(dimension);
    const int n = std::uniform_int_distribution(0, 64)(rng);
    std::vector<Embedding> palette;
    for (int i = 0; i < 4; ++i) {
      Embedding e(dimension);
      for (int d = 0; d < dimension; ++d) e[d] = std::normal_distribution<double>(0.0, 1.0)(rng);
      palette.push_back(e);
    }
    for (int i = 0; i < n; ++i) {
      MemoryRecord r;
      r.id = static_cast<MemoryId>(i * 7 % 101 + 1);
      r.tick = std::uniform_int_distribution(0, 20)(rng);
      r.last_access = r.tick + std::uniform_int_distribution(0, 5)(rng);
      r.importance = std::uniform_int_distribution(1, 10)(rng);
      r.text = "m";
      // Reused embeddings produce exact score ties.
      if (rng() % 2) {
        r.embedding = palette[rng() % palette.size()];
      } else {
        r.embedding = Embedding(dimension);
        for (int d = 0; d < dimension; ++d) r.embedding[d] = std::normal_distribution<double>(0.0, 1.0)(rng);
      }
      store.append(std::move(r));
    }
    Embedding query(dimension);
    for (int d = 0; d < dimension; ++d) query[d] = std::normal_distribution<double>(0.0, 1.0)(rng);
    const double wr = std::uniform_int_distribution(0, 3)(rng);
    const double wi = std::uniform_int_distribution(0, 3)(rng);
    const double wv = std::uniform_int_distribution(1, 3)(rng);
    const double half_life = std::uniform_real_distribution(1.0, 200.0)(rng);
    const Tick now = 30;
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, 70)(rng);

    std::vector<MemoryRecord> records(store.records().begin(), store.records().end());
    const auto expected = oracle::full_sort(records, query, now, wr, wi, wv, half_life);
    MemoryStore copy = store;
    const auto got = retrieve_top_k(copy, query, k, now, {wr, wi, wv}, half_life);
    const std::size_t m = std::min(k, expected.size());
    bool same = got.size() == m;
    for (std::size_t i = 0; same && i < m; ++i) same = got[i].record.id == expected[i];
    if (!same) ++mismatches;
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches in 1000 stores"};
}

// 3 ------------------------------------------------------------------------------
Outcome recency_law() {
  bool ok = true;
  double worst = 0.0;
  for (double half_life : {1.0, 7.0, 100.0, 333.0}) {
    MemoryRecord r;
    r.tick = 0;
    r.last_access = 0;
    const auto h = static_cast<Tick>(half_life);
    const double at_half = recency_score(r, h, half_life);
    worst = std::max(worst, std::abs(at_half - 0.5));
    ok &= std::abs(at_half - 0.5) <= kRecencyTolerance;
    double previous = recency_score(r, 0, half_life);
    ok &= previous == 1.0;
    for (Tick age = 1; age <= 10 * h; ++age) {
      const double value = recency_score(r, age, half_life);
      ok &= value < previous;
      previous = value;
    }
  }
  char shown[32];
  std::snprintf(shown, sizeof shown, "%.3e", worst);
  return {ok, std::string("max |recency(half_life) - 0.5| = ") + shown + ", strictly decreasing to 10 half-lives"};
}

// 4 ------------------------------------------------------------------------------
Outcome tremor_equivalence() {
  std::mt19937_64 rng(99);
  const int w = 32, h = 24;
  TerrainGrid grid(w, h, 0.5);
  std::vector<std::vector<double>> cells(h, std::vector<double>(w, 0.5));
  const double threshold = 0.5;
  std::vector<double> oracle_changes;
  std::vector<std::size_t> detected;
  std::size_t total_mismatch = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    const int x = std::uniform_int_distribution(0, w - 1)(rng);
    const int y = std::uniform_int_distribution(0, h - 1)(rng);
    const int ew = std::uniform_int_distribution(1, w - x)(rng) % 6 + 1;
    const int eh = std::uniform_int_distribution(1, h - y)(rng) % 6 + 1;
    const CellRange region{x, y, std::min(ew, w - x), std::min(eh, h - y)};
    const double delta = std::uniform_real_distribution(-0.3, 0.3)(rng);
    auto edit = apply_terrain_edit(grid, region, delta);
    grid = std::move(edit.grid);
    const double expected = oracle::apply_edit(cells, region.x, region.y, region.width, region.height, delta);
    oracle_changes.push_back(expected);
    if (std::abs(expected - edit.total_change) > 1e-9) ++total_mismatch;
    if (detect_tremor(edit.total_change, threshold, region, static_cast<Tick>(i))) detected.push_back(i);
  }
  const auto expected = oracle::tremor_filter(oracle_changes, threshold);
  const bool ok = detected == expected && total_mismatch == 0;
  return {ok, std::to_string(detected.size()) + " tremors detected, oracle " + std::to_string(expected.size()) +
                  (detected == expected ? ", same order" : ", ORDER/COUNT DIFFER")};
}

// 5 ------------------------------------------------------------------------------
Outcome somatic_bounds() {
  std::mt19937_64 rng(5);
  std::size_t outside = 0;
  for (int i = 0; i < 10000; ++i) {
    SomaticState state{std::uniform_real_distribution(0.0, 1.0)(rng)};
    const ActionKind kind = kActionCatalogue[std::uniform_int_distribution<std::size_t>(0, 13)(rng)];
    state = update_somatic(state, kind, std::uniform_int_distribution(0, 100)(rng));
    if (state.tiredness < 0.0 || state.tiredness > 1.0) ++outside;
  }
  const double nap = update_somatic({0.5}, ActionKind::take_nap, 30).tiredness;
  return {outside == 0 && nap == 0.0,
          std::to_string(outside) + " of 10000 outside [0,1]; take_nap x30 from 0.5 gives " + format_double(nap)};
}

// 6 ------------------------------------------------------------------------------
Outcome catalogue_closure() {
  std::mt19937_64 rng(6);
  const std::vector<std::string> seeds = {
      R"({"tool_calls":[{"name":"go_to","arguments":{"target":{"x":1,"y":2}}}]})",
      R"({"name":"talk_to","arguments":{"target":"boy"}})",
      R"([{"name":"rest"},{"name":"dance","arguments":{}}])",
      R"({"name":"fly","arguments":{}})",
  };
  const std::string alphabet = "{}[]\",:0123456789.-abcdefghijklmnopqrstuvwxyz_ \\\n\t";
  std::size_t foreign = 0, crashes = 0, parsed = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string raw;
    switch (i % 3) {
      case 0: {  // random bytes
        const int n = std::uniform_int_distribution(0, 120)(rng);
        for (int c = 0; c < n; ++c) raw.push_back(static_cast<char>(rng() % 256));
        break;
      }
      case 1: {  // JSON-ish noise
        const int n = std::uniform_int_distribution(0, 120)(rng);
        for (int c = 0; c < n; ++c) raw.push_back(alphabet[rng() % alphabet.size()]);
        break;
      }
      default: {  // mutated valid calls
        raw = seeds[rng() % seeds.size()];
        const int edits = std::uniform_int_distribution(0, 4)(rng);
        for (int e = 0; e < edits && !raw.empty(); ++e) {
          const std::size_t at = rng() % raw.size();
          switch (rng() % 3) {
            case 0: raw[at] = alphabet[rng() % alphabet.size()]; break;
            case 1: raw.erase(at, 1); break;
            default: raw.insert(at, 1, alphabet[rng() % alphabet.size()]);
          }
        }
      }
    }
    try {
      for (const auto& call : parse_tool_calls(raw, action_tools())) {
        ++parsed;
        if (!action_from_string(call.name)) ++foreign;
      }
    } catch (const ToolParseError&) {
    } catch (...) {
      ++crashes;
    }
  }
  return {foreign == 0 && crashes == 0, std::to_string(foreign) + " non-catalogue actions, " + std::to_string(crashes) +
                                            " crashes, " + std::to_string(parsed) + " calls accepted"};
}

// 7 ------------------------------------------------------------------------------
Outcome posture_soundness() {
  std::mt19937_64 rng(7);
  std::size_t violations = 0, executed = 0;
  TerrainGrid terrain(64, 64, 0.5);
  WorldClock clock{1, 400};
  SessionRng session_rng(7);
  for (int sequence = 0; sequence < 10000; ++sequence) {
    std::vector<AgentState> agents(1);
    agents[0].persona = {"boy", "d", ""};
    agents[0].pose = {"boy", Vec2(10.5, 10.5), static_cast<Posture>(rng() % 3)};
    const int length = std::uniform_int_distribution(1, 12)(rng);
    for (int step = 0; step < length; ++step) {
      const WorldView view{clock, terrain, agents, {}, {}, 10.0};
      const ActionKind kind = kActionCatalogue[std::uniform_int_distribution<std::size_t>(0, 13)(rng)];
      ActionTarget target;
      if (kind == ActionKind::go_to) target = Vec2(3.5, 3.5);
      const ActionRequest request{"boy", kind, target, clock.tick};
      if (validate_action(request, agents[0], view)) continue;
      const Posture before = agents[0].pose.posture;
      if ((kind == ActionKind::stand_up && before == Posture::standing) ||
          (kind == ActionKind::sit_down && before == Posture::napping))
        ++violations;
      const auto effects = execute_action(request, agents[0], view, session_rng);
      for (const auto& change : effects.pose_changes)
        if (change.posture) agents[0].pose.posture = *change.posture;
      ++executed;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations in 10000 sequences (" + std::to_string(executed) +
                               " executed actions)"};
}

// 8 ------------------------------------------------------------------------------
Outcome reflection_trigger() {
  std::mt19937_64 rng(8);
  std::size_t wrong_trigger = 0, nonzero_after = 0;
  TextBackend backend("[6] The ground moves when visitors are near.");
  for (int trial = 0; trial < 1000; ++trial) {
    const int threshold = std::uniform_int_distribution(1, 60)(rng);
    MemoryStore store(8);
    std::vector<int> importances;
    std::optional<std::size_t> fired;
    for (std::size_t i = 0; i < 40; ++i) {
      importances.push_back(std::uniform_int_distribution(1, 10)(rng));
      store.remember(static_cast<Tick>(i), MemoryKind::observation, "event " + std::to_string(i), importances.back());
      if (!fired && should_reflect(store, threshold)) fired = i;
    }
    if (fired != oracle::first_reach(importances, 0, threshold)) ++wrong_trigger;
    if (fired) {
      ReflectionRequest request;
      request.agent_id = "boy";
      request.now = 40;
      synthesize_reflection(store, backend, request, threshold);
      if (store.importance_accumulator() != 0) ++nonzero_after;
    }
  }
  return {wrong_trigger == 0 && nonzero_after == 0, std::to_string(wrong_trigger) + " early/late triggers, " +
                                                        std::to_string(nonzero_after) + " nonzero accumulators after"};
}

// 9 ------------------------------------------------------------------------------
Outcome budget_safety() {
  std::mt19937_64 rng(9);
  std::size_t over = 0, not_prefix = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto text = [&](int max) { return std::string(std::uniform_int_distribution(0, max)(rng), 'x'); };
    PromptInputs inputs;
    inputs.system_text = text(200);
    inputs.world_context = text(200);
    const int n = std::uniform_int_distribution(0, 30)(rng);
    for (int i = 0; i < n; ++i) {
      MemoryRecord r;
      r.id = static_cast<MemoryId>(i + 1);
      r.tick = std::uniform_int_distribution(0, 50)(rng);
      r.text = text(150) + "m";
      inputs.memories.push_back({r, std::uniform_int_distribution(0, 8)(rng) / 8.0});
    }
    const int h = std::uniform_int_distribution(0, 10)(rng);
    for (int i = 0; i < h; ++i) inputs.history.push_back({"boy", text(80), i});
    const int mandatory = oracle::tokens(inputs.system_text) + oracle::tokens(inputs.world_context);
    const int budget = mandatory + std::uniform_int_distribution(0, 600)(rng);

    // Reference ranking written independently: score desc, tick desc, id asc.
    auto ranked = inputs.memories;
    for (std::size_t i = 0; i < ranked.size(); ++i)
      for (std::size_t j = 0; j + 1 < ranked.size() - i; ++j) {
        const auto& a = ranked[j];
        const auto& b = ranked[j + 1];
        const bool swap = a.score < b.score || (a.score == b.score && (a.record.tick < b.record.tick ||
                                                                      (a.record.tick == b.record.tick && a.record.id > b.record.id)));
        if (swap) std::swap(ranked[j], ranked[j + 1]);
      }

    const PromptContext context = assemble_prompt(inputs, budget);
    const int actual = oracle::tokens(context.system_text) + oracle::tokens(context.render_user_text());
    if (context.estimated_tokens > budget || actual > budget) ++over;
    bool prefix = context.retrieved_memories.size() <= ranked.size();
    for (std::size_t i = 0; prefix && i < context.retrieved_memories.size(); ++i)
      prefix = context.retrieved_memories[i].record.id == ranked[i].record.id;
    if (!prefix) ++not_prefix;
  }
  return {over == 0 && not_prefix == 0,
          std::to_string(over) + " over budget, " + std::to_string(not_prefix) + " non-prefix selections in 1000"};
}

// 10 -----------------------------------------------------------------------------
Outcome conversation_discipline() {
  std::mt19937_64 rng(10);
  std::size_t bad = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int max_turns = std::uniform_int_distribution(1, 10)(rng);
    const int end_at = std::uniform_int_distribution(1, 14)(rng);  // 1-based turn carrying [END]
    Scenario scenario;
    scenario.seed = 1;
    scenario.reflection_threshold = 100000;
    scenario.max_turns = max_turns;
    scenario.agents = {{{"woman", "d", ""}, Vec2(5.5, 5.5), Posture::standing},
                       {{"boy", "d", ""}, Vec2(8.5, 5.5), Posture::standing}};
    auto backend = std::make_shared<ScriptedBackend>();
    backend->add("woman", 1, {false, ModelReply::calls({{"talk_to", {{"target", "boy"}}}})});
    int woman_step = 2, boy_step = 1;
    for (int turn = 1; turn <= 14; ++turn) {
      std::string line = "line " + std::to_string(turn);
      if (turn == end_at) line += " [END]";
      if (turn % 2 == 1) backend->add("woman", woman_step++, {false, ModelReply::text(line)});
      else backend->add("boy", boy_step++, {false, ModelReply::text(line)});
    }
    SessionLog log;
    Simulation sim(scenario, backend, log);
    Tick closed_at = 0;
    for (int t = 0; t < 20 && closed_at == 0; ++t) {
      sim.tick();
      if (!sim.conversations().at(0).open()) closed_at = sim.clock().tick;
    }
    sim.tick();
    const Conversation& c = sim.conversations().at(0);
    const int expected_turns = std::min(end_at, max_turns);
    const std::string expected_reason = end_at < max_turns ? "end_marker" : "max_turns";
    bool ok = closed_at != 0 && static_cast<int>(c.turns.size()) == expected_turns;
    for (std::size_t i = 0; ok && i < c.turns.size(); ++i) ok = c.turns[i].speaker == (i % 2 == 0 ? "woman" : "boy");
    std::string reason;
    std::set<std::string> acted_after;
    for (const auto& entry : log.entries_since(0)) {
      if (entry.category == LogCategory::event && entry.payload.value("kind", "") == "conversation_closed")
        reason = entry.payload["reason"].get<std::string>();
      if (entry.category == LogCategory::action && entry.tick == closed_at + 1) acted_after.insert(entry.actor);
    }
    ok = ok && reason == expected_reason && acted_after.size() == 2;
    for (const auto& agent : sim.agents()) ok = ok && !agent.conversation.has_value();
    if (!ok) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " of 300 random conversations broke alternation, closure or release"};
}

// 11 -----------------------------------------------------------------------------
Outcome log_completeness() {
  const auto path = work_path("acceptance-run0.jsonl");
  const auto lines = read_lines(path);
  if (lines.empty()) return {false, "no log from the determinism run"};
  std::size_t action_entries = 0;
  std::optional<std::size_t> executed;
  std::string recorded_digest;
  for (const auto& line : lines) {
    const LogEntry entry = parse_log_line(line);
    if (entry.category == LogCategory::action) ++action_entries;
    if (entry.category == LogCategory::event && entry.payload.value("kind", "") == "session_end") {
      executed = entry.payload["executed_actions"].get<std::size_t>();
      recorded_digest = entry.payload["digest"].get<std::string>();
    }
  }
  const auto replayed = replay(path, default_scenario(), std::nullopt);

  // The same with participant inputs in the log.
  const auto with_inputs = work_path("acceptance-inputs.jsonl");
  Scenario scenario = default_scenario();
  std::size_t executed_live = 0, action_live = 0;
  {
    SessionLog log(with_inputs);
    Simulation sim(scenario, make_scripted_backend(scenario, std::nullopt), log);
    for (Tick t = 1; t <= 300; ++t) {
      if (t % 37 == 0) sim.inbox().enqueue(TerrainEditInput{{static_cast<int>(t % 50), 20, 4, 4}, 0.2});
      if (t % 53 == 0) sim.inbox().enqueue(UtteranceInput{"visitor", "What do you see?", std::string("boy")});
      sim.tick();
    }
    sim.finish();
    executed_live = sim.executed_actions();
    for (const auto& entry : log.entries_since(0)) action_live += entry.category == LogCategory::action;
  }
  const auto replayed_inputs = replay(with_inputs, scenario, std::nullopt);

  const bool ok = executed && *executed == action_entries && replayed.digest == recorded_digest &&
                  executed_live == action_live;
  return {ok, std::to_string(action_entries) + " action entries for " + std::to_string(executed.value_or(0)) +
                  " executed actions; replay digest " + replayed.digest + " vs recorded " + recorded_digest +
                  "; with inputs " + std::to_string(action_live) + "/" + std::to_string(executed_live) +
                  ", replay ok (" + std::to_string(replayed_inputs.lines) + " lines)"};
}

// 12 -----------------------------------------------------------------------------
std::vector<Seq> stream_once(unsigned short port, Seq since, std::size_t limit) {
  namespace beast = boost::beast;
  namespace net = boost::asio;
  net::io_context io;
  net::ip::tcp::socket socket(io);
  socket.connect({net::ip::make_address("127.0.0.1"), port});
  beast::websocket::stream<net::ip::tcp::socket> ws(std::move(socket));
  ws.handshake("127.0.0.1", "/events?since=" + std::to_string(since));
  std::vector<Seq> seqs;
  beast::flat_buffer buffer;
  while (seqs.size() < limit) {
    beast::error_code ec;
    ws.read(buffer, ec);
    if (ec) break;
    seqs.push_back(parse_log_line(beast::buffers_to_string(buffer.data())).seq);
    buffer.consume(buffer.size());
  }
  beast::error_code ec;
  // Drop the connection abruptly half the time.
  if (limit % 2 == 0) ws.close(beast::websocket::close_code::normal, ec);
  return seqs;
}

Outcome stream_continuity() {
  SessionLog log;
  const Scenario scenario = default_scenario();
  SessionHost host(scenario, make_scripted_backend(scenario, std::nullopt), log, {Tick(150), std::chrono::milliseconds(2)});
  ApiServer server(host, "127.0.0.1", 0);
  server.start();
  host.start();
  std::mt19937_64 rng(12);
  std::vector<Seq> received;
  int connections = 0;
  while (true) {
    const Seq since = received.empty() ? 0 : received.back();
    const std::size_t limit = std::uniform_int_distribution<std::size_t>(1, 60)(rng);
    auto chunk = stream_once(server.port(), since, limit);
    ++connections;
    received.insert(received.end(), chunk.begin(), chunk.end());
    if (chunk.size() < limit) break;  // stream ended: log closed and drained
  }
  host.wait();
  server.stop();
  std::size_t gaps = 0, duplicates = 0;
  for (std::size_t i = 0; i < received.size(); ++i) {
    const Seq expected = i + 1;
    if (received[i] < expected) ++duplicates;
    if (received[i] > expected) ++gaps;
  }
  const bool complete = received.size() == log.last_seq();
  return {gaps == 0 && duplicates == 0 && complete,
          std::to_string(received.size()) + " of " + std::to_string(log.last_seq()) + " entries over " +
              std::to_string(connections) + " connections, " + std::to_string(gaps) + " gaps, " +
              std::to_string(duplicates) + " duplicates"};
}

}  // namespace

int main() {
  report("determinism", determinism);
  report("retrieval-oracle", retrieval_oracle);
  report("recency-law", recency_law);
  report("tremor-equivalence", tremor_equivalence);
  report("somatic-bounds", somatic_bounds);
  report("catalogue-closure", catalogue_closure);
  report("posture-soundness", posture_soundness);
  report("reflection-trigger", reflection_trigger);
  report("budget-safety", budget_safety);
  report("conversation-discipline", conversation_discipline);
  report("log-completeness", log_completeness);
  report("stream-continuity", stream_continuity);
  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
