#include <filesystem>
#include <fstream>
#include <map>
#include <tuple>

#include "doctest.h"
#include "llmscape/backends.hpp"
#include "llmscape/orchestrator.hpp"

using namespace llmscape;

namespace {

AgentSpec spec(const std::string& name, double x, double y) {
  return {{name, "A test character.", "plainly"}, Vec2(x, y), Posture::standing};
}

Scenario small_scenario(std::vector<AgentSpec> agents) {
  Scenario scenario;
  scenario.name = "test";
  scenario.seed = 7;
  scenario.agents = std::move(agents);
  scenario.reflection_threshold = 100000;
  return scenario;
}

std::string call_line(const std::string& agent, int step, const std::string& name, Json arguments = Json::object()) {
  return Json{{"agent", agent}, {"step", step}, {"tool_calls", Json::array({{{"name", name}, {"arguments", arguments}}})}}
             .dump() + "\n";
}

std::string text_line(const std::string& agent, int step, const std::string& text) {
  return Json{{"agent", agent}, {"step", step}, {"text", text}}.dump() + "\n";
}

std::string error_line(const std::string& agent, int step) {
  return Json{{"agent", agent}, {"step", step}, {"error", "down"}}.dump() + "\n";
}

std::shared_ptr<Backend> script(const std::string& text) {
  return std::make_shared<ScriptedBackend>(ScriptedBackend::from_string(text));
}

using Row = std::tuple<Tick, std::string, std::string>;

std::vector<Row> action_rows(const SessionLog& log) {
  std::vector<Row> rows;
  for (const auto& entry : log.entries_since(0))
    if (entry.category == LogCategory::action)
      rows.emplace_back(entry.tick, entry.actor, entry.payload["action"].get<std::string>());
  return rows;
}

std::vector<LogEntry> events_of_kind(const SessionLog& log, const std::string& kind) {
  std::vector<LogEntry> found;
  for (const auto& entry : log.entries_since(0))
    if (entry.category == LogCategory::event && entry.payload.value("kind", "") == kind) found.push_back(entry);
  return found;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("llmscape-test-" + name);
}

}  // namespace

TEST_CASE("input inbox") {
  InputInbox inbox(8, 4);
  CHECK(inbox.enqueue(TerrainEditInput{{0, 0, 2, 2}, 0.1}) == 1);
  CHECK(inbox.enqueue(UtteranceInput{"visitor", "hi", std::nullopt}) == 2);
  CHECK(inbox.enqueue(ShadowInput{ShadowMask::Constant(4, 8, false)}) == 3);
  for (const ParticipantInput& bad :
       {ParticipantInput{TerrainEditInput{{7, 0, 2, 1}, 0.1}}, ParticipantInput{TerrainEditInput{{0, 0, 0, 1}, 0.1}},
        ParticipantInput{TerrainEditInput{{0, 0, 1, 1}, std::nan("")}},
        ParticipantInput{UtteranceInput{"visitor", "  ", std::nullopt}},
        ParticipantInput{UtteranceInput{"", "hi", std::nullopt}},
        ParticipantInput{ShadowInput{ShadowMask::Constant(8, 4, false)}}}) {
    try {
      inbox.enqueue(bad);
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::input_error);
    }
  }
  CHECK(inbox.pending() == 3);
  const auto drained = inbox.drain();
  REQUIRE(drained.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(drained[i].arrival == i + 1);
  CHECK(std::holds_alternative<UtteranceInput>(drained[1].input));
  CHECK(inbox.pending() == 0);
  CHECK(inbox.enqueue(UtteranceInput{"visitor", "again", std::nullopt}) == 4);
}

TEST_CASE("participant edits apply at the next tick") {
  SessionLog log;
  Simulation sim(small_scenario({}), script(""), log);
  sim.tick();
  sim.inbox().enqueue(TerrainEditInput{{2, 2, 3, 3}, 0.2});
  CHECK(sim.terrain().at(3, 3) == 0.5);
  const auto report = sim.tick();
  CHECK(report.inputs_processed == 1);
  CHECK(sim.terrain().at(3, 3) == doctest::Approx(0.7));
  CHECK(sim.terrain().at(5, 5) == 0.5);
  const auto edits = events_of_kind(log, "terrain_edit");
  REQUIRE(edits.size() == 1);
  CHECK(edits[0].tick == 2);
  CHECK(edits[0].actor == "participant");
  const auto tremors = events_of_kind(log, "tremor");
  REQUIRE(tremors.size() == 1);  // 9 cells x 0.2 = 1.8 > 0.5
  CHECK(tremors[0].payload["source"] == "participant");
}

TEST_CASE("an empty world still ticks") {
  SessionLog log;
  Simulation sim(small_scenario({}), script(""), log);
  for (int i = 0; i < 10; ++i) sim.tick();
  sim.finish();
  CHECK(sim.clock().tick == 10);
  CHECK(sim.executed_actions() == 0);
  CHECK(log.size() == 2);  // session_start, session_end
}

TEST_CASE("a 20-tick schedule follows the duration table") {
  const std::string text = call_line("woman", 1, "sit_down") + call_line("woman", 2, "take_nap") +
                           call_line("woman", 3, "stand_up") + call_line("woman", 4, "dance") +
                           call_line("woman", 5, "pile_up_sand") + call_line("boy", 1, "go_to", {{"target", {40.5, 5.5}}}) +
                           call_line("boy", 2, "whistle") + call_line("boy", 3, "rest") + call_line("boy", 4, "wander") +
                           call_line("flamingo", 1, "take_nap");
  SessionLog log;
  Simulation sim(small_scenario({spec("woman", 5.5, 5.5), spec("boy", 30.5, 5.5), spec("flamingo", 55.5, 55.5)}),
                 script(text), log);
  for (int i = 0; i < 20; ++i) {
    sim.tick();
    if (sim.clock().tick == 6) CHECK(sim.agents()[1].pose.position == Vec2(40.5, 5.5));
  }

  // Worked out by hand: each agent picks again once busy_until (start + duration) is reached.
  std::vector<Row> expected = {
      {1, "woman", "sit_down"}, {1, "boy", "go_to"}, {1, "flamingo", "take_nap"},
      {2, "woman", "wait"},  // take_nap while sitting is rejected
      {3, "woman", "stand_up"}, {4, "woman", "dance"},   {6, "boy", "whistle"},
      {7, "boy", "rest"},       {9, "woman", "pile_up_sand"}};
  for (Tick t = 14; t <= 20; ++t) {
    expected.emplace_back(t, "woman", "wait");
    if (t == 17) expected.emplace_back(17, "boy", "wander");
  }
  CHECK(action_rows(log) == expected);
  CHECK(sim.executed_actions() == expected.size());

  std::size_t rejected = 0;
  for (const auto& entry : log.entries_since(0))
    if (entry.category == LogCategory::error && entry.payload.value("during", "") == "validate_action") {
      ++rejected;
      CHECK(entry.tick == 2);
      CHECK(entry.payload["message"] == "posture_violation");
    }
  CHECK(rejected == 1);
  CHECK(sim.agents()[0].pose.posture == Posture::standing);
  CHECK(sim.agents()[2].pose.posture == Posture::napping);
  CHECK(sim.terrain().at(5, 5) == doctest::Approx(0.6));
}

TEST_CASE("the same seed and script give the same session") {
  auto run = [] {
    SessionLog log;
    const Scenario scenario = default_scenario();
    Simulation sim(scenario, make_scripted_backend(scenario, std::nullopt), log);
    sim.inbox().enqueue(TerrainEditInput{{10, 10, 4, 4}, 0.3});
    run_session(sim, 150);
    return log.lines();
  };
  const auto first = run();
  CHECK(first.size() > 100);
  CHECK(first == run());
}

TEST_CASE("start_conversation") {
  SessionLog log;
  Scenario scenario = small_scenario({spec("woman", 5.5, 5.5), spec("boy", 7.5, 5.5), spec("flamingo", 9.5, 5.5)});
  scenario.participants = {"visitor"};
  Simulation sim(scenario, script(""), log);
  sim.tick();

  auto& conversation = sim.start_conversation({"woman", ActionKind::talk_to, std::string("boy"), 1});
  CHECK(conversation.participants[0] == "woman");
  CHECK(conversation.next_speaker() == "woman");
  CHECK(sim.agents()[0].conversation == conversation.id);
  CHECK(sim.agents()[1].conversation == conversation.id);

  auto code_of = [&](ActionRequest request) {
    try {
      sim.start_conversation(request);
    } catch (const ValidationFailure& e) {
      return std::optional(e.code());
    }
    return std::optional<ValidationCode>();
  };
  CHECK(code_of({"flamingo", ActionKind::talk_to, std::string("boy"), 1}) == ValidationCode::target_busy);
  CHECK(code_of({"flamingo", ActionKind::talk_to, std::string("ghost"), 1}) == ValidationCode::target_unknown);
  CHECK(code_of({"flamingo", ActionKind::talk_to, std::string("visitor"), 1}) == std::nullopt);
  CHECK(code_of({"woman", ActionKind::talk_to, std::string("flamingo"), 1}) == ValidationCode::actor_busy);
  CHECK(events_of_kind(log, "conversation_opened").size() == 2);
}

TEST_CASE("agent conversations") {
  SessionLog log;
  Scenario scenario = small_scenario({spec("woman", 5.5, 5.5), spec("boy", 7.5, 5.5)});
  scenario.max_turns = 4;
  std::string text = call_line("woman", 1, "talk_to", {{"target", "boy"}});

  SUBCASE("closes at max_turns with strict alternation") {
    text += text_line("woman", 2, "One") + text_line("boy", 1, "Two") + text_line("woman", 3, "Three") +
            text_line("boy", 2, "Four") + text_line("woman", 4, "Five");
    Simulation sim(scenario, script(text), log);
    for (int i = 0; i < 4; ++i) sim.tick();
    const Conversation& c = sim.conversations().at(0);
    CHECK_FALSE(c.open());
    REQUIRE(c.turns.size() == 4);
    for (std::size_t i = 0; i < c.turns.size(); ++i) CHECK(c.turns[i].speaker == (i % 2 == 0 ? "woman" : "boy"));
    CHECK(c.turns[3].text == "Four");
    const auto closed = events_of_kind(log, "conversation_closed");
    REQUIRE(closed.size() == 1);
    CHECK(closed[0].payload["reason"] == "max_turns");
    CHECK(closed[0].tick == 4);
    for (const auto& agent : sim.agents()) {
      CHECK_FALSE(agent.conversation.has_value());
      CHECK(agent.idle(sim.clock().tick));
    }
    // Both pick actions again on the next tick.
    sim.tick();
    const auto rows = action_rows(log);
    CHECK(rows.back() == Row{5, "boy", "wait"});
  }
  SUBCASE("closes at the end marker") {
    text += text_line("woman", 2, "Hello") + text_line("boy", 1, "Goodbye [END]");
    Simulation sim(scenario, script(text), log);
    sim.tick();
    sim.tick();
    const Conversation& c = sim.conversations().at(0);
    CHECK_FALSE(c.open());
    CHECK(c.turns.size() == 2);
    CHECK(c.turns[1].text == "Goodbye");
    CHECK(events_of_kind(log, "conversation_closed").at(0).payload["reason"] == "end_marker");
    CHECK_FALSE(sim.agents()[1].conversation.has_value());
  }
  SUBCASE("two failures in a row close it") {
    text += error_line("woman", 2) + error_line("woman", 3);
    Simulation sim(scenario, script(text), log);
    sim.tick();
    CHECK(sim.conversations().at(0).open());
    sim.tick();
    CHECK_FALSE(sim.conversations().at(0).open());
    CHECK(events_of_kind(log, "conversation_closed").at(0).payload["reason"] == "backend_failures");
  }
  SUBCASE("the listener remembers what was said") {
    text += text_line("woman", 2, "The sand hums");
    Simulation sim(scenario, script(text), log);
    sim.tick();
    bool heard = false;
    for (const auto& record : sim.agents()[1].memory.records())
      heard |= record.text == "woman said to me: \"The sand hums\"";
    CHECK(heard);
  }
}

TEST_CASE("participant conversations") {
  SessionLog log;
  Scenario scenario = small_scenario({spec("boy", 7.5, 5.5)});
  scenario.participants = {"visitor"};
  const std::string text = text_line("boy", 1, "Who are you?") + text_line("boy", 2, "I see.");
  Simulation sim(scenario, script(text), log);

  sim.inbox().enqueue(UtteranceInput{"visitor", "Hello boy", std::string("boy")});
  sim.tick();
  const Conversation& c = sim.conversations().at(0);
  REQUIRE(c.turns.size() == 2);
  CHECK(c.turns[0].speaker == "visitor");
  CHECK(c.turns[1].text == "Who are you?");
  CHECK(c.next_speaker() == "visitor");

  sim.inbox().enqueue(UtteranceInput{"visitor", "A friend", std::string("boy")});
  sim.tick();
  CHECK(c.turns.size() == 4);
  CHECK(c.turns[2].text == "A friend");

  // Nobody answers now; the boy is released after the reply timeout.
  Tick closed_at = 0;
  for (int i = 0; i < 30 && closed_at == 0; ++i) {
    sim.tick();
    if (!sim.conversations().at(0).open()) closed_at = sim.clock().tick;
  }
  CHECK(closed_at == 2 + scenario.participant_reply_timeout + 1);
  CHECK(events_of_kind(log, "conversation_closed").at(0).payload["reason"] == "participant_timeout");
  CHECK_FALSE(sim.agents()[0].conversation.has_value());
  std::size_t participant_speech = 0;
  for (const auto& entry : log.entries_since(0))
    participant_speech += entry.category == LogCategory::speech && entry.actor == "participant";
  CHECK(participant_speech == 2);
}

TEST_CASE("agents never stall") {
  SessionLog log;
  const Scenario scenario = default_scenario();
  Simulation sim(scenario, make_scripted_backend(scenario, std::nullopt), log);
  const Tick ticks = 500;
  run_session(sim, ticks);
  const Tick window = 2 * 30;
  std::map<std::string, Tick> last;
  for (const auto& agent : sim.agents()) last[agent.id()] = 0;
  for (const auto& [tick, actor, action] : action_rows(log)) {
    CHECK_MESSAGE(tick - last[actor] <= window, actor << " idle until " << tick);
    last[actor] = tick;
  }
  for (const auto& [actor, tick] : last) CHECK_MESSAGE(ticks - tick <= window, actor);
}

TEST_CASE("replay reproduces a recorded session") {
  const auto path = temp_path("replay.jsonl");
  const Scenario scenario = default_scenario();
  {
    SessionLog log(path);
    Simulation sim(scenario, make_scripted_backend(scenario, std::nullopt), log);
    for (Tick t = 1; t <= 120; ++t) {
      if (t == 10) sim.inbox().enqueue(TerrainEditInput{{20, 20, 5, 5}, 0.25});
      if (t == 30) sim.inbox().enqueue(UtteranceInput{"visitor", "Is anyone there?", std::string("flamingo")});
      if (t == 50) {
        ShadowMask mask = ShadowMask::Constant(scenario.height, scenario.width, false);
        mask.block(0, 0, 32, 32).setConstant(true);
        sim.inbox().enqueue(ShadowInput{mask});
      }
      sim.tick();
    }
    sim.finish();
  }
  const auto result = replay(path, scenario, std::nullopt);
  CHECK(result.ticks == 120);

  std::vector<std::string> lines;
  {
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
  }
  CHECK(result.lines == lines.size());

  // Flip one character inside an action entry part-way through.
  std::size_t target = 0;
  for (std::size_t i = lines.size() / 2; i < lines.size(); ++i)
    if (lines[i].find("\"category\":\"action\"") != std::string::npos) {
      target = i;
      break;
    }
  REQUIRE(target > 0);
  auto at = lines[target].find("\"duration\":");
  REQUIRE(at != std::string::npos);
  at += 11;
  lines[target][at] = lines[target][at] == '7' ? '8' : '7';
  const auto tampered = temp_path("tampered.jsonl");
  {
    std::ofstream out(tampered);
    for (const auto& line : lines) out << line << "\n";
  }
  try {
    replay(tampered, scenario, std::nullopt);
    FAIL("tampered log replayed");
  } catch (const ReplayError& e) {
    CHECK(e.seq() == target + 1);
  }
  std::filesystem::remove(path);
  std::filesystem::remove(tampered);
}
