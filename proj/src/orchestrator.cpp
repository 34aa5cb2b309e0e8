#include "llmscape/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "llmscape/backends.hpp"

namespace llmscape {

// --- inbox --------------------------------------------------------------------

std::uint64_t InputInbox::enqueue(ParticipantInput input) {
  if (const auto* edit = std::get_if<TerrainEditInput>(&input)) {
    const auto& r = edit->region;
    if (r.width < 1 || r.height < 1 || r.x < 0 || r.y < 0 || r.x + r.width > width_ || r.y + r.height > height_)
      throw Error(Errc::input_error, "terrain edit region outside the terrain");
    if (!std::isfinite(edit->delta)) throw Error(Errc::input_error, "terrain edit delta is not finite");
  } else if (const auto* utterance = std::get_if<UtteranceInput>(&input)) {
    if (utterance->text.find_first_not_of(" \t\r\n") == std::string::npos)
      throw Error(Errc::input_error, "utterance text is empty");
    if (utterance->speaker.empty()) throw Error(Errc::input_error, "utterance without a speaker");
  } else if (const auto* shadow = std::get_if<ShadowInput>(&input)) {
    if (shadow->mask.rows() != height_ || shadow->mask.cols() != width_)
      throw Error(Errc::input_error, "shadow mask does not match the terrain size");
  }
  std::lock_guard lock(mutex_);
  const std::uint64_t arrival = next_arrival_++;
  queue_.push_back({arrival, std::move(input)});
  return arrival;
}

std::vector<StampedInput> InputInbox::drain() {
  std::lock_guard lock(mutex_);
  std::vector<StampedInput> drained(std::make_move_iterator(queue_.begin()),
                                    std::make_move_iterator(queue_.end()));
  queue_.clear();
  return drained;
}

std::size_t InputInbox::pending() const {
  std::lock_guard lock(mutex_);
  return queue_.size();
}

// --- reports and snapshots ----------------------------------------------------

Json TickReport::to_json() const {
  Json event_list = Json::array();
  for (const auto& event : events) event_list.push_back(llmscape::to_json(event));
  Json action_list = Json::array();
  for (const auto& action : actions) {
    Json item = {{"actor", action.actor}, {"action", to_string(action.kind)}};
    if (!std::holds_alternative<std::monostate>(action.target)) item["target"] = llmscape::to_json(action.target);
    action_list.push_back(std::move(item));
  }
  return {{"tick", tick},
          {"inputs_processed", inputs_processed},
          {"events", event_list},
          {"actions", action_list},
          {"first_seq", first_seq},
          {"last_seq", last_seq}};
}

Json StateSnapshot::to_json(int stride) const {
  stride = std::max(stride, 1);
  Json rows = Json::array();
  for (int y = 0; y < terrain.height(); y += stride) {
    Json row = Json::array();
    for (int x = 0; x < terrain.width(); x += stride) row.push_back(terrain.at(x, y));
    rows.push_back(std::move(row));
  }
  Json agent_list = Json::array();
  for (const auto& agent : agents) {
    agent_list.push_back({{"name", agent.name},
                          {"position", {{"x", agent.position.x()}, {"y", agent.position.y()}}},
                          {"posture", to_string(agent.posture)},
                          {"current_action", agent.current_action ? Json(to_string(*agent.current_action)) : Json()},
                          {"tiredness_bucket", agent.tiredness_bucket}});
  }
  Json conversation_list = Json::array();
  for (const auto& conversation : conversations) {
    Json item = {{"id", conversation.id}, {"participants", conversation.participants}};
    item["last_turn"] = conversation.last_turn
                            ? Json{{"speaker", conversation.last_turn->speaker},
                                   {"text", conversation.last_turn->text},
                                   {"tick", conversation.last_turn->tick}}
                            : Json();
    conversation_list.push_back(std::move(item));
  }
  return {{"tick", tick},
          {"phase", to_string(phase)},
          {"width", terrain.width()},
          {"height", terrain.height()},
          {"stride", stride},
          {"terrain", rows},
          {"agents", agent_list},
          {"conversations", conversation_list},
          {"last_seq", last_seq}};
}

namespace {

constexpr Tick kReflectionRetryTicks = 20;

}  // namespace

// --- simulation -----------------------------------------------------------------

Simulation::Simulation(Scenario scenario, std::shared_ptr<Backend> backend, SessionLog& log)
    : scenario_((scenario.validate(), std::move(scenario))),
      backend_(std::move(backend)),
      log_(log),
      terrain_(scenario_.initial_terrain()),
      clock_{0, scenario_.ticks_per_day},
      inbox_(scenario_.width, scenario_.height),
      rng_(scenario_.seed) {
  if (!backend_) throw Error(Errc::configuration_error, "simulation needs a backend");
  for (const auto& spec : scenario_.agents) {
    AgentState agent;
    agent.persona = spec.persona;
    agent.pose = {spec.persona.name, spec.position, spec.posture};
    agent.memory = MemoryStore(scenario_.embedding_dimension);
    agents_.push_back(std::move(agent));
  }
  // Agents start out aware of their surroundings; only changes are news.
  const auto poses = view().poses();
  for (auto& agent : agents_) {
    agent.last_phase = clock_.phase();
    agent.last_nearby = nearby_entities(poses, agent.id(), scenario_.mind.perception_radius);
  }
}

std::vector<std::string> Simulation::engaged_participants() const {
  std::vector<std::string> engaged;
  for (const auto& conversation : conversations_) {
    if (!conversation.open()) continue;
    for (const auto& id : conversation.participants) {
      const bool is_agent = std::any_of(agents_.begin(), agents_.end(),
                                        [&](const AgentState& a) { return a.id() == id; });
      if (!is_agent) engaged.push_back(id);
    }
  }
  return engaged;
}

WorldView Simulation::view() const {
  // engaged_ must outlive the view; refreshed whenever conversations change.
  return {clock_, terrain_, agents_, scenario_.participants, engaged_, scenario_.mind.perception_radius};
}

AgentState* Simulation::find_agent(std::string_view id) {
  for (auto& agent : agents_)
    if (agent.id() == id) return &agent;
  return nullptr;
}

void Simulation::emit_event(const WorldEvent& event, const std::string& actor) {
  log_.emit(clock_.tick, actor, LogCategory::event, to_json(event));
}

void Simulation::log_error(const std::string& actor, const Error& error, Json context) {
  Json payload = {{"code", to_string(error.code())}, {"message", error.what()}};
  if (context.is_object())
    for (auto& [key, value] : context.items()) payload[key] = value;
  log_.emit(clock_.tick, actor, LogCategory::error, std::move(payload));
}

TickReport Simulation::tick() {
  if (!started_) {
    started_ = true;
    Json roster = Json::array();
    for (const auto& agent : agents_) roster.push_back(agent.id());
    log_.emit(clock_.tick, "world", LogCategory::event,
              {{"kind", "session_start"},
               {"scenario", scenario_.name},
               {"seed", scenario_.seed},
               {"width", scenario_.width},
               {"height", scenario_.height},
               {"agents", roster}});
  }

  TickReport report;
  clock_ = advance_clock(clock_);
  report.tick = clock_.tick;
  report.first_seq = log_.last_seq() + 1;

  // (2) inputs and world events; events spawned by actions last tick come first.
  std::vector<WorldEvent> events = std::move(pending_events_);
  pending_events_.clear();
  process_inputs(events, report);
  report.events = events;

  // (3) agents in roster order.
  for (auto& agent : agents_) run_agent(agent, events, report);

  // (4) one turn per open conversation.
  for (std::size_t i = 0; i < conversations_.size(); ++i) {
    Conversation& conversation = conversations_[i];
    if (!conversation.open()) continue;
    if (find_agent(conversation.next_speaker()) != nullptr) {
      conversation_turn(conversation);
    } else if (clock_.tick - conversation.last_activity() > scenario_.participant_reply_timeout) {
      close_conversation(conversation, "participant_timeout");
    }
  }

  // (5)
  log_.flush();
  report.last_seq = log_.last_seq();
  return report;
}

void Simulation::process_inputs(std::vector<WorldEvent>& events, TickReport& report) {
  const Tick now = clock_.tick;
  for (auto& stamped : inbox_.drain()) {
    ++report.inputs_processed;
    if (const auto* edit = std::get_if<TerrainEditInput>(&stamped.input)) {
      try {
        TerrainEdit result = apply_terrain_edit(terrain_, edit->region, edit->delta);
        terrain_ = std::move(result.grid);
        log_.emit(now, "participant", LogCategory::event,
                  {{"kind", "terrain_edit"},
                   {"region", to_json(edit->region)},
                   {"delta", edit->delta},
                   {"arrival", stamped.arrival},
                   {"total_change", result.total_change}});
        if (auto tremor = detect_tremor(result.total_change, scenario_.tremor_threshold, edit->region, now)) {
          tremor->source = "participant";
          emit_event(*tremor, "world");
          events.push_back(std::move(*tremor));
        }
      } catch (const Error& e) {
        log_error("participant", e, {{"during", "terrain_edit"}, {"arrival", stamped.arrival}});
      }
    } else if (const auto* utterance = std::get_if<UtteranceInput>(&stamped.input)) {
      WorldEvent event;
      event.kind = EventKind::utterance;
      event.magnitude = 1.0;
      event.region = scenario_.microphone_region();
      event.tick = now;
      event.payload = utterance->text;
      event.source = utterance->speaker;
      event.target = utterance->target;
      Json payload = to_json(event);
      payload["arrival"] = stamped.arrival;
      log_.emit(now, "participant", LogCategory::event, std::move(payload));
      events.push_back(event);
      handle_utterance(*utterance, events);
    } else if (const auto* shadow = std::get_if<ShadowInput>(&stamped.input)) {
      Json cells = Json::array();
      for (int y = 0; y < shadow->mask.rows(); ++y)
        for (int x = 0; x < shadow->mask.cols(); ++x)
          if (shadow->mask(y, x)) cells.push_back({x, y});
      log_.emit(now, "participant", LogCategory::event,
                {{"kind", "shadow_mask"}, {"cells", cells}, {"arrival", stamped.arrival}});
      for (auto& event : detect_shadow(shadow->mask, terrain_, view().poses(), now)) {
        emit_event(event, "world");
        events.push_back(std::move(event));
      }
    }
  }
}

void Simulation::handle_utterance(const UtteranceInput& input, std::vector<WorldEvent>&) {
  if (!input.target) return;
  AgentState* agent = find_agent(*input.target);
  if (agent == nullptr || find_agent(input.speaker) != nullptr) return;

  if (agent->conversation) {
    auto it = std::find_if(conversations_.begin(), conversations_.end(),
                           [&](const Conversation& c) { return c.id == *agent->conversation; });
    if (it != conversations_.end() && it->open() && it->other(agent->id()) == input.speaker &&
        it->next_speaker() == input.speaker)
      add_turn(*it, input.speaker, input.text);
    return;
  }
  if (!agent->idle(clock_.tick)) return;
  if (std::find(engaged_.begin(), engaged_.end(), input.speaker) != engaged_.end()) return;

  // Addressing a free agent opens a conversation with the speaker first.
  Conversation conversation;
  conversation.id = next_conversation_++;
  conversation.participants = {input.speaker, agent->id()};
  conversation.max_turns = scenario_.max_turns;
  conversation.opened_tick = clock_.tick;
  agent->conversation = conversation.id;
  conversations_.push_back(std::move(conversation));
  engaged_ = engaged_participants();
  log_.emit(clock_.tick, "participant", LogCategory::event,
            {{"kind", "conversation_opened"},
             {"conversation", conversations_.back().id},
             {"participants", conversations_.back().participants}});
  add_turn(conversations_.back(), input.speaker, input.text);
}

void Simulation::run_agent(AgentState& agent, std::span<const WorldEvent> events, TickReport& report) {
  const Tick now = clock_.tick;
  const MindConfig& mind = scenario_.mind;
  if (agent.idle(now)) agent.current_action.reset();

  perceive(agent, view(), events, backend_.get(), log_, mind);

  if (agent.plan && !agent.plan->steps.empty()) {
    const auto tremor = std::find_if(events.begin(), events.end(), [&](const WorldEvent& e) {
      return e.kind == EventKind::tremor && e.source != agent.id() &&
             in_perception(agent, e, mind.perception_radius);
    });
    if (tremor != events.end()) {
      try {
        adapt_plan(agent, *tremor, view(), *backend_, log_, mind);
      } catch (const Error&) {
        // Logged by adapt_plan; the old plan stays.
      }
    }
  }

  if (now >= agent.reflection_retry_at && should_reflect(agent.memory, scenario_.reflection_threshold))
    reflect(agent, false);

  if (!agent.activated) {
    agent.activated = true;
    if (scenario_.plan_on_start && !agent.plan) {
      try {
        formulate_goals(agent, view(), *backend_, log_, mind);
      } catch (const Error&) {
      }
    }
  }

  if (agent.idle(now)) {
    ActionRequest request;
    try {
      request = choose_action(agent, view(), *backend_, log_, mind);
    } catch (const Error& e) {
      log_error(agent.id(), e, {{"during", "choose_action"}, {"fallback", "wait"}});
      request = {agent.id(), ActionKind::wait, std::monostate{}, now};
    }
    begin_action(agent, std::move(request), report);
  } else if (agent.move_target) {
    agent.pose = step_towards(agent.pose, *agent.move_target, scenario_.actions.agent_speed);
    if (agent.pose.position == *agent.move_target) agent.move_target.reset();
  }
}

void Simulation::reflect(AgentState& agent, bool forced) {
  ReflectionRequest request;
  request.agent_id = agent.id();
  request.system_text = persona_text(agent);
  request.now = clock_.tick;
  request.token_budget = scenario_.mind.token_budget;
  request.weights = scenario_.mind.weights;
  request.half_life = scenario_.mind.half_life;
  try {
    const auto insights = forced ? force_reflection(agent.memory, *backend_, request)
                                 : synthesize_reflection(agent.memory, *backend_, request,
                                                         scenario_.reflection_threshold);
    for (const auto& insight : insights)
      log_.emit(clock_.tick, agent.id(), LogCategory::contemplation,
                {{"kind", "reflection"}, {"text", insight.text}, {"importance", insight.importance}});
  } catch (const Error& e) {
    log_error(agent.id(), e, {{"during", "self_reflect"}});
    agent.reflection_retry_at = clock_.tick + kReflectionRetryTicks;
  }
}

void Simulation::begin_action(AgentState& agent, ActionRequest request, TickReport& report) {
  const Tick now = clock_.tick;
  if (const auto code = validate_action(request, agent, view())) {
    log_.emit(now, agent.id(), LogCategory::error,
              {{"code", to_string(Errc::validation_error)},
               {"message", std::string(to_string(*code))},
               {"action", to_string(request.kind)},
               {"during", "validate_action"},
               {"fallback", "wait"}});
    request = {agent.id(), ActionKind::wait, std::monostate{}, now};
  }

  const ActionEffects effects = execute_action(request, agent, view(), rng_, scenario_.actions);
  ++executed_actions_;
  report.actions.push_back(request);

  Json payload = {{"action", to_string(request.kind)}, {"duration", effects.duration_ticks}};
  if (!std::holds_alternative<std::monostate>(request.target)) payload["target"] = to_json(request.target);
  log_.emit(now, agent.id(), LogCategory::action, std::move(payload));

  agent.somatic = update_somatic(agent.somatic, request.kind, effects.duration_ticks);
  for (const auto& change : effects.pose_changes) {
    AgentState* target = find_agent(change.entity_id);
    if (target == nullptr) continue;
    if (change.posture) target->pose.posture = *change.posture;
    if (change.move_target) target->move_target = *change.move_target;
  }
  for (const auto& change : effects.terrain_edits) apply_terrain_change(change, agent.id());
  for (const auto& event : effects.spawned_events) {
    emit_event(event, agent.id());
    pending_events_.push_back(event);
  }
  for (const auto& text : effects.spawned_memories)
    agent.memory.remember(now, MemoryKind::observation, text, rate_importance(backend_.get(), agent.id(), text));

  agent.busy_until = now + effects.duration_ticks;
  agent.current_action = request.kind;
  if (agent.move_target) {
    agent.pose = step_towards(agent.pose, *agent.move_target, scenario_.actions.agent_speed);
    if (agent.pose.position == *agent.move_target) agent.move_target.reset();
  }
  if (agent.plan && !agent.plan->finished() && agent.plan->steps[agent.plan->cursor].action == request.kind)
    ++agent.plan->cursor;

  switch (effects.delegation) {
    case Delegation::conversation:
      try {
        start_conversation(request);
      } catch (const Error& e) {
        log_error(agent.id(), e, {{"during", "talk_to"}});
      }
      break;
    case Delegation::reflection:
      reflect(agent, true);
      break;
    case Delegation::formulate_goals:
      try {
        formulate_goals(agent, view(), *backend_, log_, scenario_.mind);
      } catch (const Error&) {
      }
      break;
    case Delegation::adapt_plan: {
      WorldEvent trigger;
      trigger.kind = EventKind::ambient;
      trigger.tick = now;
      trigger.source = agent.id();
      trigger.payload = "my plan no longer fits what I see";
      trigger.region = {agent.pose.cell_x(), agent.pose.cell_y(), 1, 1};
      try {
        adapt_plan(agent, trigger, view(), *backend_, log_, scenario_.mind);
      } catch (const Error&) {
      }
      break;
    }
    case Delegation::none:
      break;
  }
}

void Simulation::apply_terrain_change(const TerrainChange& change, const std::string& actor) {
  if (change.region.width < 1 || change.region.height < 1) return;
  TerrainEdit result = apply_terrain_edit(terrain_, change.region, change.delta);
  terrain_ = std::move(result.grid);
  if (auto tremor = detect_tremor(result.total_change, scenario_.tremor_threshold, change.region, clock_.tick)) {
    tremor->source = actor;
    emit_event(*tremor, "world");
    pending_events_.push_back(std::move(*tremor));
  }
}

Conversation& Simulation::start_conversation(const ActionRequest& request) {
  const auto* target = std::get_if<std::string>(&request.target);
  AgentState* initiator = find_agent(request.actor);
  if (initiator == nullptr) throw ValidationFailure(ValidationCode::unknown_actor);
  if (target == nullptr) throw ValidationFailure(ValidationCode::target_missing);
  if (initiator->conversation) throw ValidationFailure(ValidationCode::actor_busy);

  AgentState* other = find_agent(*target);
  const bool participant = std::find(scenario_.participants.begin(), scenario_.participants.end(),
                                     *target) != scenario_.participants.end();
  if (other == nullptr && !participant) throw ValidationFailure(ValidationCode::target_unknown);
  if (other != nullptr ? other->conversation.has_value()
                       : std::find(engaged_.begin(), engaged_.end(), *target) != engaged_.end())
    throw ValidationFailure(ValidationCode::target_busy);

  Conversation conversation;
  conversation.id = next_conversation_++;
  conversation.participants = {request.actor, *target};
  conversation.max_turns = scenario_.max_turns;
  conversation.opened_tick = clock_.tick;
  initiator->conversation = conversation.id;
  if (other != nullptr) other->conversation = conversation.id;
  conversations_.push_back(std::move(conversation));
  engaged_ = engaged_participants();
  log_.emit(clock_.tick, request.actor, LogCategory::event,
            {{"kind", "conversation_opened"},
             {"conversation", conversations_.back().id},
             {"participants", conversations_.back().participants}});
  return conversations_.back();
}

void Simulation::add_turn(Conversation& conversation, const std::string& speaker, const std::string& text) {
  const Tick now = clock_.tick;
  conversation.turns.push_back({speaker, text, now});
  const std::string& listener = conversation.other(speaker);
  if (find_agent(speaker) == nullptr) {
    // Participant lines; agent lines are logged by compose_utterance.
    log_.emit(now, "participant", LogCategory::speech,
              {{"conversation", conversation.id}, {"speaker", speaker}, {"listener", listener}, {"text", text}});
  } else if (AgentState* hearer = find_agent(listener)) {
    const std::string memory = speaker + " said to me: \"" + text + "\"";
    hearer->memory.remember(now, MemoryKind::speech, memory, rate_importance(backend_.get(), hearer->id(), memory));
  }
  if (static_cast<int>(conversation.turns.size()) >= conversation.max_turns)
    close_conversation(conversation, "max_turns");
}

void Simulation::conversation_turn(Conversation& conversation) {
  if (!conversation.open()) throw Error(Errc::precondition_violation, "conversation is closed");
  AgentState* speaker = find_agent(conversation.next_speaker());
  if (speaker == nullptr) throw Error(Errc::precondition_violation, "next speaker is not an agent");
  const std::string listener = conversation.other(speaker->id());

  try {
    const Utterance utterance = compose_utterance(*speaker, listener, conversation.turns, conversation.id,
                                                  view(), *backend_, log_, scenario_.mind);
    conversation.consecutive_failures = 0;
    if (!utterance.text.empty()) add_turn(conversation, speaker->id(), utterance.text);
    if (conversation.open() && utterance.ends_conversation) close_conversation(conversation, "end_marker");
  } catch (const Error& e) {
    log_error(speaker->id(), e, {{"during", "conversation_turn"}, {"conversation", conversation.id}});
    if (++conversation.consecutive_failures >= 2) close_conversation(conversation, "backend_failures");
  }
}

void Simulation::close_conversation(Conversation& conversation, std::string_view reason) {
  conversation.state = ConversationState::closed;
  for (const auto& id : conversation.participants) {
    if (AgentState* agent = find_agent(id); agent != nullptr && agent->conversation == conversation.id) {
      agent->conversation.reset();
      agent->busy_until = std::min(agent->busy_until, clock_.tick);
      agent->current_action.reset();
    }
  }
  engaged_ = engaged_participants();
  log_.emit(clock_.tick, "world", LogCategory::event,
            {{"kind", "conversation_closed"},
             {"conversation", conversation.id},
             {"reason", reason},
             {"turns", conversation.turns.size()}});
}

void Simulation::finish() {
  if (finished_) return;
  finished_ = true;
  log_.emit(clock_.tick, "world", LogCategory::event,
            {{"kind", "session_end"},
             {"ticks", clock_.tick},
             {"executed_actions", executed_actions_},
             {"digest", state_digest()}});
  log_.flush();
}

Json Simulation::canonical_state() const {
  Json rows = Json::array();
  for (int y = 0; y < terrain_.height(); ++y) {
    Json row = Json::array();
    for (int x = 0; x < terrain_.width(); ++x) row.push_back(terrain_.at(x, y));
    rows.push_back(std::move(row));
  }
  Json agent_list = Json::array();
  for (const auto& agent : agents_) {
    Json memories = Json::array();
    for (const auto& record : agent.memory.records())
      memories.push_back({{"id", record.id},
                          {"tick", record.tick},
                          {"kind", to_string(record.kind)},
                          {"text", record.text},
                          {"importance", record.importance},
                          {"last_access", record.last_access}});
    agent_list.push_back({{"name", agent.id()},
                          {"position", {agent.pose.position.x(), agent.pose.position.y()}},
                          {"posture", to_string(agent.pose.posture)},
                          {"tiredness", agent.somatic.tiredness},
                          {"busy_until", agent.busy_until},
                          {"conversation", agent.conversation ? Json(*agent.conversation) : Json()},
                          {"plan", agent.plan ? to_json(*agent.plan) : Json()},
                          {"accumulator", agent.memory.importance_accumulator()},
                          {"memory", memories}});
  }
  return {{"tick", clock_.tick}, {"rng_position", rng_.position()}, {"terrain", rows}, {"agents", agent_list}};
}

std::string Simulation::state_digest() const { return hex64(fnv1a64(canonical_json(canonical_state()))); }

StateSnapshot Simulation::snapshot() const {
  StateSnapshot snapshot;
  snapshot.tick = clock_.tick;
  snapshot.phase = clock_.phase();
  snapshot.terrain = terrain_;
  for (const auto& agent : agents_)
    snapshot.agents.push_back({agent.id(), agent.pose.position, agent.pose.posture, agent.current_action,
                               tiredness_bucket(agent.somatic)});
  for (const auto& conversation : conversations_) {
    if (!conversation.open()) continue;
    ConversationSummary summary{conversation.id, conversation.participants, std::nullopt};
    if (!conversation.turns.empty()) summary.last_turn = conversation.turns.back();
    snapshot.conversations.push_back(std::move(summary));
  }
  snapshot.last_seq = log_.last_seq();
  return snapshot;
}

// --- sessions -------------------------------------------------------------------

std::shared_ptr<Backend> make_scripted_backend(const Scenario& scenario,
                                               const std::optional<std::filesystem::path>& script_path) {
  if (script_path) return std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(*script_path));
  if (scenario.script_path) return std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(*scenario.script_path));
  if (scenario.script_text) return std::make_shared<ScriptedBackend>(ScriptedBackend::from_string(*scenario.script_text));
  return std::make_shared<ScriptedBackend>();
}

SessionResult run_session(Simulation& simulation, Tick ticks) {
  for (Tick i = 0; i < ticks; ++i) simulation.tick();
  simulation.finish();
  return {simulation.clock().tick, simulation.state_digest(), simulation.executed_actions()};
}

namespace {

std::optional<ParticipantInput> input_from_entry(const LogEntry& entry, int width, int height) {
  if (entry.actor != "participant" || entry.category != LogCategory::event) return std::nullopt;
  const Json& p = entry.payload;
  const std::string kind = p.value("kind", "");
  if (kind == "terrain_edit")
    return TerrainEditInput{cell_range_from_json(p.at("region")), p.at("delta").get<double>()};
  if (kind == "utterance") {
    UtteranceInput input{p.at("source").get<std::string>(), p.at("payload").get<std::string>(), std::nullopt};
    if (p.contains("target")) input.target = p["target"].get<std::string>();
    return input;
  }
  if (kind == "shadow_mask") {
    ShadowInput input{ShadowMask::Constant(height, width, false)};
    for (const auto& cell : p.at("cells")) {
      const int x = cell.at(0).get<int>();
      const int y = cell.at(1).get<int>();
      if (x >= 0 && y >= 0 && x < width && y < height) input.mask(y, x) = true;
    }
    return input;
  }
  return std::nullopt;
}

}  // namespace

ReplayResult replay(const std::filesystem::path& log_file, const Scenario& scenario_in,
                    const std::optional<std::filesystem::path>& script_path) {
  std::ifstream in(log_file);
  if (!in) throw Error(Errc::configuration_error, "cannot open log " + log_file.string());
  std::vector<std::string> recorded;
  for (std::string line; std::getline(in, line);) recorded.push_back(std::move(line));

  Scenario scenario = scenario_in;
  Tick ticks = 0;
  std::optional<std::string> recorded_digest;
  std::optional<Seq> end_seq;
  std::map<Tick, std::vector<ParticipantInput>> inputs;
  for (const auto& line : recorded) {
    LogEntry entry;
    try {
      entry = parse_log_line(line);
    } catch (const Error&) {
      continue;  // reported by the line comparison below
    }
    ticks = std::max(ticks, entry.tick);
    const std::string kind = entry.category == LogCategory::event ? entry.payload.value("kind", "") : "";
    if (kind == "session_start" && entry.payload.contains("seed"))
      scenario.seed = entry.payload["seed"].get<std::uint64_t>();
    if (kind == "session_end") {
      ticks = entry.payload.value("ticks", ticks);
      recorded_digest = entry.payload.value("digest", "");
      end_seq = entry.seq;
    }
    try {
      if (auto input = input_from_entry(entry, scenario.width, scenario.height))
        inputs[entry.tick].push_back(std::move(*input));
    } catch (const Json::exception&) {
    }
  }

  SessionLog regenerated;
  Simulation simulation(scenario, make_scripted_backend(scenario, script_path), regenerated);
  for (Tick t = 1; t <= ticks; ++t) {
    for (auto& input : inputs[t]) {
      try {
        simulation.inbox().enqueue(std::move(input));
      } catch (const Error&) {
      }
    }
    simulation.tick();
  }
  if (end_seq) simulation.finish();

  const auto produced = regenerated.lines();
  const std::size_t n = std::max(produced.size(), recorded.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= recorded.size() || i >= produced.size() || recorded[i] != produced[i])
      throw ReplayError(i + 1, "replay diverges at seq " + std::to_string(i + 1));
  }
  const std::string digest = simulation.state_digest();
  if (recorded_digest && *recorded_digest != digest)
    throw ReplayError(end_seq.value_or(0), "final state digest differs");
  return {ticks, produced.size(), digest};
}

}  // namespace llmscape
