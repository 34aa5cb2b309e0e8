#include "llmscape/memory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <tuple>

#include "llmscape/error.hpp"
#include "llmscape/gateway.hpp"

namespace llmscape {

std::string_view to_string(MemoryKind kind) noexcept {
  switch (kind) {
    case MemoryKind::observation: return "observation";
    case MemoryKind::reflection: return "reflection";
    case MemoryKind::plan: return "plan";
    case MemoryKind::speech: return "speech";
  }
  return "observation";
}

MemoryStore::MemoryStore(int dimension) : dimension_(dimension) {
  if (dimension < 1) throw Error(Errc::configuration_error, "embedding dimension must be positive");
}

void MemoryStore::append(MemoryRecord record) {
  if (record.text.empty()) throw Error(Errc::validation_error, "memory text is empty");
  if (record.importance < 1 || record.importance > 10)
    throw Error(Errc::validation_error, "memory importance outside [1, 10]");
  if (record.embedding.size() != dimension_)
    throw Error(Errc::validation_error, "memory embedding has the wrong dimension");
  if (record.last_access < record.tick)
    throw Error(Errc::validation_error, "memory last_access precedes its tick");
  const bool duplicate = std::any_of(records_.begin(), records_.end(),
                                     [&](const MemoryRecord& r) { return r.id == record.id; });
  if (duplicate) throw Error(Errc::validation_error, "duplicate memory id");

  const auto position = std::upper_bound(
      records_.begin(), records_.end(), record, [](const MemoryRecord& a, const MemoryRecord& b) {
        return std::tie(a.tick, a.id) < std::tie(b.tick, b.id);
      });
  accumulator_ += record.importance;
  next_id_ = std::max(next_id_, record.id + 1);
  records_.insert(position, std::move(record));
}

const MemoryRecord& MemoryStore::remember(Tick tick, MemoryKind kind, std::string text,
                                          int importance) {
  MemoryRecord record;
  record.id = next_id_;
  record.tick = tick;
  record.kind = kind;
  record.embedding = embed_text(text, dimension_);
  record.text = std::move(text);
  record.importance = importance;
  record.last_access = tick;
  const MemoryId id = record.id;
  append(std::move(record));
  return *std::find_if(records_.begin(), records_.end(),
                       [id](const MemoryRecord& r) { return r.id == id; });
}

void MemoryStore::touch(MemoryId id, Tick now) {
  for (auto& record : records_) {
    if (record.id == id) record.last_access = std::max(record.last_access, now);
  }
}

Embedding embed_text(std::string_view text, int dimension) {
  Embedding v = Embedding::Zero(dimension);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    const std::uint64_t h = fnv1a64(token);
    v[static_cast<Eigen::Index>(h % static_cast<std::uint64_t>(dimension))] +=
        (h >> 63) ? -1.0 : 1.0;
    token.clear();
  };
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      token.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  const double norm = v.norm();
  if (norm > 0.0) v /= norm;
  return v;
}

int heuristic_importance(std::string_view text) noexcept {
  return std::clamp(2 + static_cast<int>(text.size() / 32), 1, 10);
}

double recency_score(const MemoryRecord& record, Tick now, double half_life) {
  if (now < record.last_access)
    throw Error(Errc::precondition_violation, "recency asked for a tick before last access");
  return std::pow(0.5, static_cast<double>(now - record.last_access) / half_life);
}

double relevance_score(const MemoryRecord& record, const Embedding& query) {
  if (record.embedding.size() != query.size())
    throw Error(Errc::input_error, "query embedding has the wrong dimension");
  const double norms = record.embedding.norm() * query.norm();
  if (norms == 0.0) return 0.5;
  const double cosine = std::clamp(record.embedding.dot(query) / norms, -1.0, 1.0);
  return (cosine + 1.0) / 2.0;
}

void RetrievalWeights::validate() const {
  if (!(recency >= 0.0) || !(importance >= 0.0) || !(relevance >= 0.0))
    throw Error(Errc::configuration_error, "retrieval weights must be nonnegative");
  if (recency == 0.0 && importance == 0.0 && relevance == 0.0)
    throw Error(Errc::configuration_error, "retrieval weights are all zero");
}

double retrieval_score(const MemoryRecord& record, const Embedding& query, Tick now,
                       const RetrievalWeights& weights, double half_life) {
  weights.validate();
  return weights.recency * recency_score(record, now, half_life) +
         weights.importance * (record.importance / 10.0) +
         weights.relevance * relevance_score(record, query);
}

bool ranks_before(const ScoredMemory& a, const ScoredMemory& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  if (a.record.tick != b.record.tick) return a.record.tick > b.record.tick;
  return a.record.id < b.record.id;
}

namespace {

std::vector<ScoredMemory> rank(const MemoryStore& store, const Embedding& query, std::size_t k,
                               Tick now, const RetrievalWeights& weights, double half_life) {
  weights.validate();
  std::vector<ScoredMemory> scored;
  scored.reserve(store.size());
  for (const auto& record : store.records())
    scored.push_back({record, retrieval_score(record, query, now, weights, half_life)});
  k = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k), scored.end(),
                    ranks_before);
  scored.resize(k);
  return scored;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

struct Insight {
  std::string text;
  std::optional<int> importance;
};

std::vector<Insight> parse_insights(const std::string& reply) {
  std::vector<Insight> insights;
  std::size_t start = 0;
  while (start <= reply.size() && insights.size() < 3) {
    auto end = reply.find('\n', start);
    if (end == std::string::npos) end = reply.size();
    std::string line = trim(std::string_view(reply).substr(start, end - start));
    start = end + 1;
    if (line.rfind("- ", 0) == 0 || line.rfind("* ", 0) == 0) line = trim(line.substr(2));
    Insight insight;
    if (line.size() > 2 && line.front() == '[') {
      const auto close = line.find(']');
      if (close != std::string::npos && close > 1 && close <= 3) {
        const std::string digits = line.substr(1, close - 1);
        if (std::all_of(digits.begin(), digits.end(), [](unsigned char c) { return std::isdigit(c); })) {
          insight.importance = std::clamp(std::stoi(digits), 1, 10);
          line = trim(line.substr(close + 1));
        }
      }
    }
    if (line.empty()) continue;
    insight.text = std::move(line);
    insights.push_back(std::move(insight));
  }
  return insights;
}

}  // namespace

std::vector<ScoredMemory> retrieve_top_k(MemoryStore& store, const Embedding& query,
                                         std::size_t k, Tick now,
                                         const RetrievalWeights& weights, double half_life) {
  auto result = rank(store, query, k, now, weights, half_life);
  for (auto& item : result) {
    store.touch(item.record.id, now);
    item.record.last_access = std::max(item.record.last_access, now);
  }
  return result;
}

bool should_reflect(const MemoryStore& store, int reflection_threshold) noexcept {
  return store.importance_accumulator() >= reflection_threshold;
}

std::vector<MemoryRecord> synthesize_reflection(MemoryStore& store, Backend& backend,
                                                const ReflectionRequest& request,
                                                int reflection_threshold) {
  if (!should_reflect(store, reflection_threshold))
    throw Error(Errc::precondition_violation, "importance accumulator below reflection threshold");
  return force_reflection(store, backend, request);
}

std::vector<MemoryRecord> force_reflection(MemoryStore& store, Backend& backend,
                                           const ReflectionRequest& request) {
  // Focus on what happened lately: the centroid of the newest records.
  Embedding query = Embedding::Zero(store.dimension());
  const auto records = store.records();
  const std::size_t recent = std::min(request.focus_count, records.size());
  for (std::size_t i = records.size() - recent; i < records.size(); ++i) query += records[i].embedding;

  auto focus = rank(store, query, request.focus_count, request.now, request.weights, request.half_life);

  PromptInputs inputs;
  inputs.agent_id = request.agent_id;
  inputs.system_text = request.system_text;
  inputs.world_context =
      "Reflect on the memories below. State one to three high-level insights they suggest, "
      "one per line. You may prefix a line with an importance from 1 to 10, like [7].";
  inputs.memories = focus;
  const PromptContext context = assemble_prompt(std::move(inputs), request.token_budget);

  const ModelReply reply = backend.complete(context);
  if (!reply.is_text()) throw Error(Errc::backend_error, "reflection reply carried tool calls");
  const auto insights = parse_insights(reply.as_text());
  if (insights.empty()) throw Error(Errc::backend_error, "reflection reply had no insight");

  std::vector<MemoryRecord> added;
  for (const auto& insight : insights) {
    const int importance = insight.importance.value_or(heuristic_importance(insight.text));
    added.push_back(store.remember(request.now, MemoryKind::reflection, insight.text, importance));
  }
  for (const auto& item : focus) store.touch(item.record.id, request.now);
  store.reset_accumulator();
  return added;
}

}  // namespace llmscape
