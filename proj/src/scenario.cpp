#include "llmscape/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "default_assets.hpp"

namespace llmscape {
namespace {

[[noreturn]] void bad(const std::string& why) { throw Error(Errc::configuration_error, "scenario: " + why); }

Vec2 read_point(const Json& j) {
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return {j[0].get<double>(), j[1].get<double>()};
  if (j.is_object() && j.contains("x") && j.contains("y")) return {j["x"].get<double>(), j["y"].get<double>()};
  bad("position must be [x, y]");
}

}  // namespace

void Scenario::validate() const {
  if (width < 1 || height < 1) bad("terrain needs at least one cell");
  if (!(fill >= 0.0 && fill <= 1.0)) bad("fill outside [0, 1]");
  if (ticks_per_day < 4) bad("ticks_per_day must be at least 4");
  if (!(tremor_threshold > 0.0)) bad("tremor threshold must be positive");
  if (reflection_threshold < 1) bad("reflection threshold must be positive");
  if (embedding_dimension < 1) bad("embedding dimension must be positive");
  if (max_turns < 1) bad("max_turns must be positive");
  if (participant_reply_timeout < 1) bad("participant_reply_timeout must be positive");
  if (!(mind.perception_radius > 0.0)) bad("perception radius must be positive");
  if (!(mind.half_life > 0.0)) bad("half_life must be positive");
  if (mind.token_budget < 1) bad("token budget must be positive");
  if (!(actions.agent_speed > 0.0)) bad("agent speed must be positive");
  mind.weights.validate();

  const TerrainGrid probe(width, height);
  std::vector<std::string> names;
  for (const auto& agent : agents) {
    if (agent.persona.name.empty()) bad("agent without a name");
    if (agent.persona.disposition.empty()) bad(agent.persona.name + " has no disposition");
    if (!probe.in_bounds(agent.position)) bad(agent.persona.name + " starts outside the terrain");
    names.push_back(agent.persona.name);
  }
  for (const auto& participant : participants) {
    if (participant.empty()) bad("participant without an id");
    names.push_back(participant);
  }
  std::sort(names.begin(), names.end());
  if (std::adjacent_find(names.begin(), names.end()) != names.end()) bad("entity names must be unique");
  if (microphone && !probe.in_bounds(*microphone)) bad("microphone region outside the terrain");
}

TerrainGrid Scenario::initial_terrain() const {
  TerrainGrid grid(width, height, fill);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double h = fill;
      for (const auto& bump : bumps) {
        const double d = std::hypot(x + 0.5 - bump.x, y + 0.5 - bump.y) / bump.radius;
        if (d < 1.0) h += bump.height * (1.0 - d * d) * (1.0 - d * d);
      }
      grid.set(x, y, h);
    }
  }
  return grid;
}

CellRange Scenario::microphone_region() const {
  return microphone.value_or(CellRange{0, 0, width, height});
}

Scenario scenario_from_json(const Json& j, const std::filesystem::path& base_dir) {
  Scenario s;
  try {
    if (!j.is_object()) bad("top level must be an object");
    s.name = j.value("name", s.name);
    s.seed = j.value("seed", s.seed);
    if (j.contains("terrain")) {
      const Json& t = j["terrain"];
      s.width = t.value("width", s.width);
      s.height = t.value("height", s.height);
      s.fill = t.value("fill", s.fill);
      for (const auto& b : t.value("bumps", Json::array()))
        s.bumps.push_back({b.at("x").get<double>(), b.at("y").get<double>(),
                           b.at("radius").get<double>(), b.at("height").get<double>()});
    }
    for (const auto& a : j.value("agents", Json::array())) {
      AgentSpec agent;
      agent.persona.name = a.at("name").get<std::string>();
      agent.persona.disposition = a.value("disposition", "");
      agent.persona.speech_style = a.value("speech_style", "");
      agent.position = read_point(a.at("position"));
      if (a.contains("posture")) {
        const auto posture = posture_from_string(a["posture"].get<std::string>());
        if (!posture) bad("unknown posture for " + agent.persona.name);
        agent.posture = *posture;
      }
      s.agents.push_back(std::move(agent));
    }
    s.participants = j.value("participants", s.participants);
    if (j.contains("clock")) s.ticks_per_day = j["clock"].value("ticks_per_day", s.ticks_per_day);
    if (j.contains("thresholds")) {
      s.tremor_threshold = j["thresholds"].value("tremor", s.tremor_threshold);
      s.reflection_threshold = j["thresholds"].value("reflection", s.reflection_threshold);
    }
    if (j.contains("memory")) {
      const Json& m = j["memory"];
      s.embedding_dimension = m.value("dimension", s.embedding_dimension);
      s.mind.half_life = m.value("half_life", s.mind.half_life);
      s.mind.retrieve_k = m.value("retrieve_k", s.mind.retrieve_k);
      if (m.contains("weights")) {
        const auto w = m["weights"].get<std::vector<double>>();
        if (w.size() != 3) bad("memory.weights needs three numbers");
        s.mind.weights = {w[0], w[1], w[2]};
      }
    }
    if (j.contains("agent")) {
      const Json& a = j["agent"];
      s.mind.perception_radius = a.value("perception_radius", s.mind.perception_radius);
      s.mind.token_budget = a.value("token_budget", s.mind.token_budget);
      s.mind.choice_attempts = a.value("choice_attempts", s.mind.choice_attempts);
      s.actions.agent_speed = a.value("speed", s.actions.agent_speed);
      s.actions.pile_delta = a.value("pile_delta", s.actions.pile_delta);
    }
    if (j.contains("conversation")) {
      s.max_turns = j["conversation"].value("max_turns", s.max_turns);
      s.participant_reply_timeout =
          j["conversation"].value("participant_reply_timeout", s.participant_reply_timeout);
    }
    if (j.contains("microphone")) s.microphone = cell_range_from_json(j["microphone"]);
    s.plan_on_start = j.value("plan_on_start", s.plan_on_start);
    if (j.contains("script")) {
      std::filesystem::path script = j["script"].get<std::string>();
      s.script_path = script.is_absolute() || base_dir.empty() ? script : base_dir / script;
    }
  } catch (const Json::exception& e) {
    bad(e.what());
  }
  s.validate();
  return s;
}

Json to_json(const Scenario& s) {
  Json agents = Json::array();
  for (const auto& a : s.agents)
    agents.push_back({{"name", a.persona.name},
                      {"disposition", a.persona.disposition},
                      {"speech_style", a.persona.speech_style},
                      {"position", {a.position.x(), a.position.y()}},
                      {"posture", to_string(a.posture)}});
  Json bumps = Json::array();
  for (const auto& b : s.bumps) bumps.push_back({{"x", b.x}, {"y", b.y}, {"radius", b.radius}, {"height", b.height}});
  Json j = {
      {"name", s.name},
      {"seed", s.seed},
      {"terrain", {{"width", s.width}, {"height", s.height}, {"fill", s.fill}, {"bumps", bumps}}},
      {"agents", agents},
      {"participants", s.participants},
      {"clock", {{"ticks_per_day", s.ticks_per_day}}},
      {"thresholds", {{"tremor", s.tremor_threshold}, {"reflection", s.reflection_threshold}}},
      {"memory",
       {{"dimension", s.embedding_dimension},
        {"half_life", s.mind.half_life},
        {"retrieve_k", s.mind.retrieve_k},
        {"weights", {s.mind.weights.recency, s.mind.weights.importance, s.mind.weights.relevance}}}},
      {"agent",
       {{"perception_radius", s.mind.perception_radius},
        {"token_budget", s.mind.token_budget},
        {"choice_attempts", s.mind.choice_attempts},
        {"speed", s.actions.agent_speed},
        {"pile_delta", s.actions.pile_delta}}},
      {"conversation", {{"max_turns", s.max_turns}, {"participant_reply_timeout", s.participant_reply_timeout}}},
      {"microphone", to_json(s.microphone_region())},
      {"plan_on_start", s.plan_on_start},
  };
  if (s.script_path) j["script"] = s.script_path->string();
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  const Json j = Json::parse(text.str(), nullptr, false);
  if (j.is_discarded()) bad(path.string() + " is not valid JSON");
  return scenario_from_json(j, path.parent_path());
}

Scenario default_scenario() {
  Scenario s = scenario_from_json(Json::parse(assets::kDefaultScenario));
  s.script_path.reset();
  s.script_text = std::string(assets::kDefaultScript);
  return s;
}

Scenario resolve_scenario(const std::string& name_or_path) {
  if (name_or_path == "default") return default_scenario();
  return load_scenario(name_or_path);
}

}  // namespace llmscape
