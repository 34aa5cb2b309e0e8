#pragma once

#include <cstdint>
#include <random>

namespace llmscape {

/// The single seeded source of randomness of a session. Only the raw
/// mt19937_64 output (fully specified by the standard) is used, so streams
/// are identical across standard libraries.
class SessionRng {
 public:
  explicit SessionRng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t next() {
    ++position_;
    return engine_();
  }
  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  /// Uniform integer in [lo, hi], rejection sampled.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t position() const noexcept { return position_; }

 private:
  std::uint64_t seed_;
  std::uint64_t position_ = 0;
  std::mt19937_64 engine_;
};

inline std::int64_t SessionRng::uniform_int(std::int64_t lo, std::int64_t hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(next());  // full 64-bit range
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
  std::uint64_t draw = next();
  while (draw >= limit) draw = next();
  return lo + static_cast<std::int64_t>(draw % span);
}

}  // namespace llmscape
