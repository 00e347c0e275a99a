#include "coopsense/planner/behavior.hpp"

#include <cmath>
#include <limits>

namespace coopsense::planner {

std::string_view to_string(Decision decision) {
  switch (decision) {
    case Decision::proceed: return "Proceed";
    case Decision::give_way: return "GiveWay";
    case Decision::replan: return "Replan";
  }
  return "?";
}

namespace {

bool cell_occupied(const CostMap& map, const Point& p) {
  const auto c = map.cell_of(p);
  return map.in_bounds(c.x(), c.y()) && map.occupied(c.x(), c.y());
}

}  // namespace

bool path_blocked(const PlannedPath& path, const CostMap& map) {
  if (path.poses.empty()) return false;
  if (cell_occupied(map, {path.poses[0].x, path.poses[0].y})) return true;
  const double step = kCollisionSampleCells * map.resolution();
  for (std::size_t i = 1; i < path.poses.size(); ++i) {
    const Pose2& a = path.poses[i - 1];
    const Pose2& b = path.poses[i];
    const double chord = std::hypot(b.x - a.x, b.y - a.y);
    const double turn = geometry::normalize_angle(b.theta - a.theta);
    // Consecutive poses joined by a tangent arc are followed along it, as the
    // planner does; anything else is checked along the chord.
    double curvature = 0.0, length = chord;
    if (std::abs(turn) > 1e-12 && chord > 0.0) {
      curvature = 2.0 * std::sin(turn / 2.0) / chord;
      length = turn / curvature;
    }
    const Pose2 end = arc_point(a, curvature, length);
    const bool tangent = std::hypot(end.x - b.x, end.y - b.y) < 1e-6;
    const int n = std::max(1, static_cast<int>(std::ceil((tangent ? length : chord) / step - 1e-9)));
    for (int k = 1; k <= n; ++k) {
      const double t = static_cast<double>(k) / n;
      Point p;
      if (k == n) {
        p = {b.x, b.y};
      } else if (tangent) {
        const Pose2 q = arc_point(a, curvature, length * t);
        p = {q.x, q.y};
      } else {
        p = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
      }
      if (cell_occupied(map, p)) return true;
    }
  }
  return false;
}

std::optional<double> distance_to_stop_line(const StopLine& line, const Pose2& ego) {
  const Point mid = 0.5 * (line.a + line.b);
  const double along = (mid.x() - ego.x) * std::cos(ego.theta) + (mid.y() - ego.y) * std::sin(ego.theta);
  if (along <= 0.0) return std::nullopt;
  return along;
}

std::optional<StopLine> stop_line_ahead(const LaneMap& lane_map, const Pose2& ego) {
  std::optional<StopLine> best;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const auto& line : lane_map.stop_lines) {
    const auto d = distance_to_stop_line(line, ego);
    if (d && *d < best_distance) {
      best_distance = *d;
      best = line;
    }
  }
  return best;
}

Decision decide(const PlannedPath& current, const CostMap& map, const std::optional<StopLine>& stop_line,
                const PlannedPath* previous) {
  if (!current.feasible) return stop_line ? Decision::give_way : Decision::replan;
  if (previous != nullptr && (!previous->feasible || path_blocked(*previous, map))) return Decision::replan;
  return Decision::proceed;
}

}  // namespace coopsense::planner
