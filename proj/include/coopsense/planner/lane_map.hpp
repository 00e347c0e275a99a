#pragma once

// Minimal structured road description: drivable area, directed lanes,
// dividing lines, pedestrian crossings and stop lines.

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace coopsense::planner {

using Point = Eigen::Vector2d;
using Polygon = std::vector<Point>;
using Polyline = std::vector<Point>;

struct Lane {
  std::string name;
  Polyline centerline;  // ordered in the driving direction
  double width = 3.5;
  double speed_limit = 5.0;  // m/s
};

struct DividingLine {
  Polyline line;
  bool crossable = true;
};

/// Axis-aligned rectangle.
struct Rect {
  Point min = Point::Zero();
  Point max = Point::Zero();

  bool contains(const Point& p) const;
};

struct CrossingZone {
  Rect area;
  std::optional<double> speed_limit;
};

struct StopLine {
  Point a = Point::Zero();
  Point b = Point::Zero();
};

struct LaneMap {
  std::vector<Polygon> drivable;
  std::vector<Lane> lanes;
  std::vector<DividingLine> dividing_lines;
  std::vector<CrossingZone> crossing_zones;
  std::vector<StopLine> stop_lines;

  /// Throws std::invalid_argument when a crossing zone does not intersect
  /// any drivable polygon, a polygon has fewer than 3 vertices or a lane has
  /// fewer than 2 centerline points.
  void validate() const;

  bool is_drivable(const Point& p) const;

  /// Lane whose centerline is nearest to p and within half its width.
  const Lane* lane_at(const Point& p) const;

  /// Unit driving direction of `lane` at the centerline point nearest p.
  static Point direction_at(const Lane& lane, const Point& p);

  /// Tightest speed limit applying at p (lane and crossing zones); nullopt
  /// when no lane covers p.
  std::optional<double> speed_limit_at(const Point& p) const;
};

bool point_in_polygon(const Polygon& polygon, const Point& p);
double distance_to_segment(const Point& p, const Point& a, const Point& b);
double distance_to_polyline(const Polyline& line, const Point& p);
bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2);
bool polygon_intersects_rect(const Polygon& polygon, const Rect& rect);

}  // namespace coopsense::planner
