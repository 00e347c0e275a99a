#include "coopsense/planner/lane_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace coopsense::planner {

namespace {

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

int orientation(const Point& a, const Point& b, const Point& c) {
  const double v = cross(b - a, c - a);
  if (std::abs(v) < 1e-12) return 0;
  return v > 0 ? 1 : -1;
}

bool on_segment(const Point& a, const Point& b, const Point& p) {
  return std::min(a.x(), b.x()) - 1e-12 <= p.x() && p.x() <= std::max(a.x(), b.x()) + 1e-12 &&
         std::min(a.y(), b.y()) - 1e-12 <= p.y() && p.y() <= std::max(a.y(), b.y()) + 1e-12;
}

}  // namespace

bool Rect::contains(const Point& p) const {
  return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() && p.y() <= max.y();
}

bool point_in_polygon(const Polygon& polygon, const Point& p) {
  bool inside = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point& a = polygon[i];
    const Point& b = polygon[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

double distance_to_segment(const Point& p, const Point& a, const Point& b) {
  const Point ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) return (p - a).norm();
  const double t = std::clamp((p - a).dot(ab) / len2, 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

double distance_to_polyline(const Polyline& line, const Point& p) {
  double best = std::numeric_limits<double>::infinity();
  if (line.size() == 1) return (p - line.front()).norm();
  for (std::size_t i = 0; i + 1 < line.size(); ++i) best = std::min(best, distance_to_segment(p, line[i], line[i + 1]));
  return best;
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

bool polygon_intersects_rect(const Polygon& polygon, const Rect& rect) {
  const Polygon corners{rect.min, {rect.max.x(), rect.min.y()}, rect.max, {rect.min.x(), rect.max.y()}};
  for (const auto& v : polygon) {
    if (rect.contains(v)) return true;
  }
  for (const auto& c : corners) {
    if (point_in_polygon(polygon, c)) return true;
  }
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    const Point& a = polygon[i];
    const Point& b = polygon[(i + 1) % polygon.size()];
    for (std::size_t k = 0; k < 4; ++k) {
      if (segments_intersect(a, b, corners[k], corners[(k + 1) % 4])) return true;
    }
  }
  return false;
}

void LaneMap::validate() const {
  for (const auto& poly : drivable) {
    if (poly.size() < 3) throw std::invalid_argument("lane map: drivable polygon needs at least 3 vertices");
  }
  for (const auto& lane : lanes) {
    if (lane.centerline.size() < 2) throw std::invalid_argument("lane map: lane '" + lane.name + "' needs 2 points");
    if (!(lane.width > 0.0) || !(lane.speed_limit > 0.0)) {
      throw std::invalid_argument("lane map: lane '" + lane.name + "' needs positive width and speed limit");
    }
  }
  for (std::size_t i = 0; i < crossing_zones.size(); ++i) {
    const bool hit = std::any_of(drivable.begin(), drivable.end(),
                                 [&](const Polygon& p) { return polygon_intersects_rect(p, crossing_zones[i].area); });
    if (!hit) {
      throw std::invalid_argument("lane map: crossing zone " + std::to_string(i) + " does not touch the drivable area");
    }
  }
}

bool LaneMap::is_drivable(const Point& p) const {
  return std::any_of(drivable.begin(), drivable.end(), [&](const Polygon& poly) { return point_in_polygon(poly, p); });
}

const Lane* LaneMap::lane_at(const Point& p) const {
  const Lane* best = nullptr;
  double best_distance = std::numeric_limits<double>::infinity();
  for (const auto& lane : lanes) {
    const double d = distance_to_polyline(lane.centerline, p);
    if (d <= 0.5 * lane.width && d < best_distance) {
      best = &lane;
      best_distance = d;
    }
  }
  return best;
}

Point LaneMap::direction_at(const Lane& lane, const Point& p) {
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < lane.centerline.size(); ++i) {
    const double d = distance_to_segment(p, lane.centerline[i], lane.centerline[i + 1]);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  const Point dir = lane.centerline[best + 1] - lane.centerline[best];
  return dir.normalized();
}

std::optional<double> LaneMap::speed_limit_at(const Point& p) const {
  const Lane* lane = lane_at(p);
  if (lane == nullptr) return std::nullopt;
  double limit = lane->speed_limit;
  for (const auto& zone : crossing_zones) {
    if (zone.speed_limit && zone.area.contains(p)) limit = std::min(limit, *zone.speed_limit);
  }
  return limit;
}

}  // namespace coopsense::planner
