#include "llmscape/world.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "llmscape/error.hpp"

namespace llmscape {

double CellRange::distance_to(const Vec2& p) const noexcept {
  const double dx = std::max({static_cast<double>(x) - p.x(), 0.0, p.x() - (x + width)});
  const double dy = std::max({static_cast<double>(y) - p.y(), 0.0, p.y() - (y + height)});
  return std::hypot(dx, dy);
}

Json to_json(const CellRange& range) {
  return {{"x", range.x}, {"y", range.y}, {"width", range.width}, {"height", range.height}};
}

CellRange cell_range_from_json(const Json& j) {
  try {
    return {j.at("x").get<int>(), j.at("y").get<int>(), j.value("width", 1), j.value("height", 1)};
  } catch (const Json::exception& e) {
    throw Error(Errc::input_error, std::string("bad region: ") + e.what());
  }
}

TerrainGrid::TerrainGrid(int width, int height, double fill) {
  if (width < 1 || height < 1) throw Error(Errc::configuration_error, "terrain needs at least one cell");
  cells_ = Eigen::ArrayXXd::Constant(height, width, std::clamp(fill, 0.0, 1.0));
}

void TerrainGrid::set(int x, int y, double value) { cells_(y, x) = std::clamp(value, 0.0, 1.0); }

bool TerrainGrid::in_bounds(const CellRange& r) const noexcept {
  return r.width > 0 && r.height > 0 && r.x >= 0 && r.y >= 0 && r.x + r.width <= width() &&
         r.y + r.height <= height();
}

bool TerrainGrid::in_bounds(const Vec2& p) const noexcept {
  return std::isfinite(p.x()) && std::isfinite(p.y()) && p.x() >= 0.0 && p.y() >= 0.0 &&
         p.x() < width() && p.y() < height();
}

CellRange TerrainGrid::clip(const CellRange& r) const noexcept {
  const int x0 = std::max(r.x, 0);
  const int y0 = std::max(r.y, 0);
  const int x1 = std::min(r.x + r.width, width());
  const int y1 = std::min(r.y + r.height, height());
  return {x0, y0, std::max(x1 - x0, 0), std::max(y1 - y0, 0)};
}

TerrainEdit apply_terrain_edit(TerrainGrid grid, const CellRange& region, double delta) {
  if (!grid.in_bounds(region)) throw Error(Errc::rejected_edit, "edit region outside the terrain");
  if (!std::isfinite(delta)) throw Error(Errc::rejected_edit, "edit delta is not finite");

  double total = 0.0;
  for (int y = region.y; y < region.y + region.height; ++y) {
    for (int x = region.x; x < region.x + region.width; ++x) {
      const double before = grid.at(x, y);
      grid.set(x, y, before + delta);
      total += std::abs(grid.at(x, y) - before);
    }
  }
  return {std::move(grid), total};
}

std::string_view to_string(Phase phase) noexcept {
  switch (phase) {
    case Phase::dawn: return "dawn";
    case Phase::day: return "day";
    case Phase::dusk: return "dusk";
    case Phase::night: return "night";
  }
  return "dawn";
}

Phase WorldClock::phase() const noexcept {
  const Tick within = ((tick % ticks_per_day) + ticks_per_day) % ticks_per_day;
  return static_cast<Phase>(std::min<Tick>(within * 4 / ticks_per_day, 3));
}

WorldClock advance_clock(WorldClock clock) noexcept {
  ++clock.tick;
  return clock;
}

std::string_view to_string(Posture posture) noexcept {
  switch (posture) {
    case Posture::standing: return "standing";
    case Posture::sitting: return "sitting";
    case Posture::napping: return "napping";
  }
  return "standing";
}

std::optional<Posture> posture_from_string(std::string_view name) noexcept {
  if (name == "standing") return Posture::standing;
  if (name == "sitting") return Posture::sitting;
  if (name == "napping") return Posture::napping;
  return std::nullopt;
}

int EntityPose::cell_x() const noexcept { return static_cast<int>(std::floor(position.x())); }
int EntityPose::cell_y() const noexcept { return static_cast<int>(std::floor(position.y())); }

std::string_view to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::tremor: return "tremor";
    case EventKind::shadow: return "shadow";
    case EventKind::utterance: return "utterance";
    case EventKind::ambient: return "ambient";
  }
  return "ambient";
}

void validate(const WorldEvent& event) {
  if (!(event.magnitude >= 0.0)) throw Error(Errc::input_error, "event magnitude must be nonnegative");
  if (event.kind == EventKind::tremor && !(event.magnitude > 0.0))
    throw Error(Errc::input_error, "tremor magnitude must be positive");
  if (event.kind == EventKind::utterance && (!event.payload || event.payload->empty()))
    throw Error(Errc::input_error, "utterance events need a transcript");
}

Json to_json(const WorldEvent& event) {
  Json j = {{"kind", to_string(event.kind)},
            {"magnitude", event.magnitude},
            {"region", to_json(event.region)},
            {"source", event.source}};
  if (event.payload) j["payload"] = *event.payload;
  if (event.target) j["target"] = *event.target;
  return j;
}

std::optional<WorldEvent> detect_tremor(double total_change, double threshold,
                                        const CellRange& region, Tick tick) {
  if (!(total_change > threshold)) return std::nullopt;
  WorldEvent event;
  event.kind = EventKind::tremor;
  event.magnitude = total_change;
  event.region = region;
  event.tick = tick;
  return event;
}

std::vector<WorldEvent> detect_shadow(const ShadowMask& mask, const TerrainGrid& grid,
                                      std::span<const EntityPose> poses, Tick tick) {
  if (mask.rows() != grid.height() || mask.cols() != grid.width())
    throw Error(Errc::input_error, "shadow mask does not match the terrain size");

  std::vector<WorldEvent> events;
  for (const auto& pose : poses) {
    const int x = pose.cell_x();
    const int y = pose.cell_y();
    if (!grid.in_bounds_cell(x, y) || !mask(y, x)) continue;
    WorldEvent event;
    event.kind = EventKind::shadow;
    event.magnitude = 1.0;
    event.region = {x, y, 1, 1};
    event.tick = tick;
    event.target = pose.entity_id;
    events.push_back(std::move(event));
  }
  return events;
}

std::vector<std::string> nearby_entities(std::span<const EntityPose> poses,
                                         std::string_view subject, double radius) {
  const auto self = std::find_if(poses.begin(), poses.end(),
                                 [&](const EntityPose& p) { return p.entity_id == subject; });
  if (self == poses.end()) throw Error(Errc::input_error, "unknown entity: " + std::string(subject));

  std::vector<std::pair<double, const std::string*>> found;
  for (const auto& pose : poses) {
    if (pose.entity_id == subject) continue;
    const double distance = (pose.position - self->position).norm();
    if (distance <= radius) found.emplace_back(distance, &pose.entity_id);
  }
  std::sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return std::tie(a.first, *a.second) < std::tie(b.first, *b.second);
  });

  std::vector<std::string> ids;
  ids.reserve(found.size());
  for (const auto& [distance, id] : found) ids.push_back(*id);
  return ids;
}

EntityPose step_towards(EntityPose pose, const Vec2& target, double speed) {
  const Vec2 offset = target - pose.position;
  const double distance = offset.norm();
  // The slack absorbs rounding so that distance/speed whole steps arrive.
  if (distance <= speed * (1.0 + 1e-9)) {
    pose.position = target;
  } else {
    pose.position += offset * (speed / distance);
  }
  return pose;
}

}  // namespace llmscape
