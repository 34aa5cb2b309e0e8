#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "llmscape/canonical.hpp"

namespace llmscape {

using Tick = std::int64_t;
using Vec2 = Eigen::Vector2d;

/// Half-open rectangle of cells: [x, x + width) x [y, y + height).
struct CellRange {
  int x = 0;
  int y = 0;
  int width = 1;
  int height = 1;

  bool contains_cell(int cx, int cy) const noexcept {
    return cx >= x && cx < x + width && cy >= y && cy < y + height;
  }
  /// Euclidean distance from `p` to the closest point of the rectangle.
  double distance_to(const Vec2& p) const noexcept;

  bool operator==(const CellRange&) const = default;
};

Json to_json(const CellRange& range);
CellRange cell_range_from_json(const Json& j);

/// Normalized elevation field. Cells are stored row-major by y, so the
/// Eigen array is `height x width` and `at(x, y) == cells()(y, x)`.
class TerrainGrid {
 public:
  TerrainGrid(int width, int height, double fill = 0.5);

  int width() const noexcept { return static_cast<int>(cells_.cols()); }
  int height() const noexcept { return static_cast<int>(cells_.rows()); }

  double at(int x, int y) const { return cells_(y, x); }
  /// Stores `value` clamped to [0, 1].
  void set(int x, int y, double value);

  const Eigen::ArrayXXd& cells() const noexcept { return cells_; }

  bool in_bounds(const CellRange& region) const noexcept;
  bool in_bounds(const Vec2& p) const noexcept;
  bool in_bounds_cell(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width() && y < height();
  }
  /// Intersection of `region` with the grid; may be empty (width or height 0).
  CellRange clip(const CellRange& region) const noexcept;

 private:
  Eigen::ArrayXXd cells_;
};

struct TerrainEdit {
  TerrainGrid grid;
  double total_change = 0.0;
};

/// Shifts every cell of `region` by `delta` and clamps to [0, 1].
/// `total_change` is the summed absolute change actually applied.
/// Throws Error(rejected_edit) when `region` is empty or leaves the grid.
TerrainEdit apply_terrain_edit(TerrainGrid grid, const CellRange& region, double delta);

enum class Phase { dawn, day, dusk, night };
std::string_view to_string(Phase phase) noexcept;

struct WorldClock {
  Tick tick = 0;
  int ticks_per_day = 400;

  /// Quarter of the day, in dawn/day/dusk/night order.
  Phase phase() const noexcept;
};

WorldClock advance_clock(WorldClock clock) noexcept;

enum class Posture { standing, sitting, napping };
std::string_view to_string(Posture posture) noexcept;
std::optional<Posture> posture_from_string(std::string_view name) noexcept;

struct EntityPose {
  std::string entity_id;
  Vec2 position = Vec2::Zero();
  Posture posture = Posture::standing;

  int cell_x() const noexcept;
  int cell_y() const noexcept;
};

enum class EventKind { tremor, shadow, utterance, ambient };
std::string_view to_string(EventKind kind) noexcept;

struct WorldEvent {
  EventKind kind = EventKind::ambient;
  double magnitude = 0.0;
  CellRange region;
  Tick tick = 0;
  std::optional<std::string> payload;
  /// Who caused it: an agent id, a participant label, or "world".
  std::string source = "world";
  /// Addressee for shadows and targeted utterances.
  std::optional<std::string> target;
};

/// Throws Error(input_error) when the event breaks its kind's invariants.
void validate(const WorldEvent& event);
Json to_json(const WorldEvent& event);

/// Returns a tremor iff `total_change > threshold`.
std::optional<WorldEvent> detect_tremor(double total_change, double threshold,
                                        const CellRange& region, Tick tick);

using ShadowMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// One shadow event per pose whose cell is covered by `mask` (indexed like
/// the terrain, `mask(y, x)`), in the order of `poses`.
std::vector<WorldEvent> detect_shadow(const ShadowMask& mask, const TerrainGrid& grid,
                                      std::span<const EntityPose> poses, Tick tick);

/// Entities within `radius` of `subject`, nearest first, ties by id.
std::vector<std::string> nearby_entities(std::span<const EntityPose> poses,
                                         std::string_view subject, double radius);

/// Moves at most `speed` along the straight line to `target`; lands exactly
/// on the target when it is within reach.
EntityPose step_towards(EntityPose pose, const Vec2& target, double speed);

}  // namespace llmscape
