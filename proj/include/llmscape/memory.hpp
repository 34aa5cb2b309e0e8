#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "llmscape/world.hpp"

namespace llmscape {

class Backend;

inline constexpr int kDefaultEmbeddingDimension = 64;
inline constexpr double kDefaultHalfLife = 100.0;
inline constexpr int kDefaultReflectionThreshold = 50;

using Embedding = Eigen::VectorXd;
using MemoryId = std::uint64_t;

enum class MemoryKind { observation, reflection, plan, speech };
std::string_view to_string(MemoryKind kind) noexcept;

struct MemoryRecord {
  MemoryId id = 0;
  Tick tick = 0;
  MemoryKind kind = MemoryKind::observation;
  std::string text;
  int importance = 1;
  Embedding embedding;
  Tick last_access = 0;
};

/// An agent's memory stream, kept in (tick, id) order.
class MemoryStore {
 public:
  explicit MemoryStore(int dimension = kDefaultEmbeddingDimension);

  /// Inserts `record` at its (tick, id) position and adds its importance
  /// to the accumulator. Throws Error(validation_error) for a malformed
  /// record or a duplicate id.
  void append(MemoryRecord record);

  /// Builds a record with the next free id, embeds `text`, and appends it.
  const MemoryRecord& remember(Tick tick, MemoryKind kind, std::string text, int importance);

  std::span<const MemoryRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  int dimension() const noexcept { return dimension_; }
  long importance_accumulator() const noexcept { return accumulator_; }
  MemoryId next_id() const noexcept { return next_id_; }

  void touch(MemoryId id, Tick now);
  void reset_accumulator() noexcept { accumulator_ = 0; }

 private:
  std::vector<MemoryRecord> records_;
  long accumulator_ = 0;
  int dimension_;
  MemoryId next_id_ = 1;
};

/// Deterministic signed token-hash bag of words, L2 normalized.
/// Text without tokens embeds to the zero vector.
Embedding embed_text(std::string_view text, int dimension = kDefaultEmbeddingDimension);

/// Length-bucket importance in [1, 10] used when no model rates a memory.
int heuristic_importance(std::string_view text) noexcept;

/// 0.5^((now - last_access) / half_life).
double recency_score(const MemoryRecord& record, Tick now, double half_life = kDefaultHalfLife);

/// (cosine + 1) / 2; 0.5 when either vector is zero.
double relevance_score(const MemoryRecord& record, const Embedding& query);

struct RetrievalWeights {
  double recency = 1.0 / 3.0;
  double importance = 1.0 / 3.0;
  double relevance = 1.0 / 3.0;

  /// Throws Error(configuration_error) for negative or all-zero weights.
  void validate() const;
};

double retrieval_score(const MemoryRecord& record, const Embedding& query, Tick now,
                       const RetrievalWeights& weights = {},
                       double half_life = kDefaultHalfLife);

struct ScoredMemory {
  MemoryRecord record;
  double score = 0.0;
};

/// Strict ordering used for every ranked memory list: higher score first,
/// then more recent tick, then lower id.
bool ranks_before(const ScoredMemory& a, const ScoredMemory& b) noexcept;

/// The `k` best records by retrieval score. Every returned record has its
/// `last_access` set to `now`, both in the store and in the result; the
/// attached score is the one it was ranked by.
std::vector<ScoredMemory> retrieve_top_k(MemoryStore& store, const Embedding& query,
                                         std::size_t k, Tick now,
                                         const RetrievalWeights& weights = {},
                                         double half_life = kDefaultHalfLife);

bool should_reflect(const MemoryStore& store, int reflection_threshold) noexcept;

struct ReflectionRequest {
  std::string agent_id;
  std::string system_text;
  Tick now = 0;
  std::size_t focus_count = 12;
  int token_budget = 2048;
  RetrievalWeights weights;
  double half_life = kDefaultHalfLife;
};

/// Asks `backend` for up to three insights about the most salient recent
/// memories and appends them as reflection records. The accumulator is
/// reset on success and untouched on failure.
/// Throws Error(precondition_violation) below the threshold and
/// Error(backend_error) when the backend fails or returns no insight.
std::vector<MemoryRecord> synthesize_reflection(MemoryStore& store, Backend& backend,
                                                const ReflectionRequest& request,
                                                int reflection_threshold);

/// Same as synthesize_reflection without the threshold check (self_reflect).
std::vector<MemoryRecord> force_reflection(MemoryStore& store, Backend& backend,
                                           const ReflectionRequest& request);

}  // namespace llmscape
