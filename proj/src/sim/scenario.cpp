#include "coopsense/sim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coopsense::sim {

namespace {

constexpr int kFigureEightSteps = 1440;

Point figure_eight_point(const Trajectory& t, double phi) {
  return t.center + Point{t.half_width * std::sin(phi), t.half_height * std::sin(2.0 * phi)};
}

Point figure_eight_tangent(const Trajectory& t, double phi) {
  return {t.half_width * std::cos(phi), 2.0 * t.half_height * std::cos(2.0 * phi)};
}

}  // namespace

void Trajectory::validate() const {
  if (!(speed >= 0.0) || !std::isfinite(speed)) throw std::invalid_argument("trajectory speed must be finite and >= 0");
  switch (kind) {
    case Kind::fixed:
      if (points.size() != 1) throw std::invalid_argument("fixed trajectory needs exactly one point");
      break;
    case Kind::waypoints:
      if (points.size() < 2) throw std::invalid_argument("waypoint trajectory needs at least two points");
      break;
    case Kind::figure_eight:
      if (!(half_width > 0.0) || !(half_height > 0.0)) {
        throw std::invalid_argument("figure-eight trajectory needs positive half_width and half_height");
      }
      break;
  }
}

Trajectory::State Trajectory::at(double time) const {
  switch (kind) {
    case Kind::fixed:
      return {{points.front().x(), points.front().y(), geometry::normalize_angle(heading)}, 0.0};
    case Kind::waypoints: {
      double remaining = std::max(0.0, time - start_time) * speed;
      const bool moving = time >= start_time && speed > 0.0;
      for (std::size_t i = 0; i + 1 < points.size(); ++i) {
        const Point d = points[i + 1] - points[i];
        const double len = d.norm();
        const double theta = std::atan2(d.y(), d.x());
        if (remaining <= len || i + 2 == points.size()) {
          const double s = std::min(remaining, len);
          const Point p = len > 0.0 ? Point(points[i] + d * (s / len)) : points[i];
          const bool arrived = remaining >= len && i + 2 == points.size();
          return {{p.x(), p.y(), theta}, moving && !arrived ? speed : 0.0};
        }
        remaining -= len;
      }
      return {{points.back().x(), points.back().y(), 0.0}, 0.0};
    }
    case Kind::figure_eight: {
      // Walk the curve at constant speed by integrating its arc length.
      const double step = 2.0 * std::numbers::pi / kFigureEightSteps;
      double perimeter = 0.0;
      for (int i = 0; i < kFigureEightSteps; ++i) {
        perimeter += (figure_eight_point(*this, (i + 1) * step) - figure_eight_point(*this, i * step)).norm();
      }
      double s = std::fmod(std::max(0.0, time) * speed, perimeter);
      double phi = 0.0;
      for (int i = 0; i < kFigureEightSteps; ++i) {
        const double seg = (figure_eight_point(*this, (i + 1) * step) - figure_eight_point(*this, i * step)).norm();
        if (s <= seg) {
          phi = i * step + (seg > 0.0 ? step * s / seg : 0.0);
          break;
        }
        s -= seg;
        phi = (i + 1) * step;
      }
      const Point p = figure_eight_point(*this, phi);
      const Point d = figure_eight_tangent(*this, phi);
      return {{p.x(), p.y(), std::atan2(d.y(), d.x())}, speed};
    }
  }
  return {};
}

void Scenario::validate() const {
  if (!(tick > 0.0) || !std::isfinite(tick)) throw std::invalid_argument("scenario '" + name + "': tick must be > 0");
  if (!(duration >= 0.0) || !std::isfinite(duration)) {
    throw std::invalid_argument("scenario '" + name + "': duration must be >= 0");
  }
  const auto receivers = std::count_if(stations.begin(), stations.end(),
                                       [](const StationSpec& s) { return s.role == StationRole::receiving; });
  if (receivers != 1) {
    throw std::invalid_argument("scenario '" + name + "': exactly one receiving station is required, found " +
                                std::to_string(receivers));
  }
  for (const auto& s : stations) {
    if (!s.pose.is_finite()) throw std::invalid_argument("station '" + s.name + "': pose must be finite");
    if (!(s.position_std >= 0.0) || !(s.heading_std >= 0.0)) {
      throw std::invalid_argument("station '" + s.name + "': standard deviations must be >= 0");
    }
    if (!(s.sensor_range > 0.0)) throw std::invalid_argument("station '" + s.name + "': sensor_range must be > 0");
  }
  for (const auto& u : road_users) {
    u.trajectory.validate();
    const auto& n = u.perception;
    if (!(n.position_std >= 0.0) || !(n.heading_std >= 0.0) || !(n.speed_std >= 0.0)) {
      throw std::invalid_argument("road user " + std::to_string(u.id) + ": standard deviations must be >= 0");
    }
  }
  if (!(channel.loss >= 0.0 && channel.loss <= 1.0)) {
    throw std::invalid_argument("scenario '" + name + "': channel loss must lie in [0, 1]");
  }
  if (channel.latency_ticks < 0) throw std::invalid_argument("scenario '" + name + "': latency must be >= 0 ticks");
  if (lane_map) lane_map->validate();
  for (const auto& poly : occluders) {
    if (poly.size() < 3) throw std::invalid_argument("scenario '" + name + "': occluder needs at least 3 vertices");
  }
  if (!(self_filter_radius > 0.0)) throw std::invalid_argument("scenario '" + name + "': self_filter_radius must be > 0");
}

const StationSpec& Scenario::receiver() const {
  for (const auto& s : stations) {
    if (s.role == StationRole::receiving) return s;
  }
  throw std::invalid_argument("scenario '" + name + "' has no receiving station");
}

bool line_of_sight(const Point& a, const Point& b, const std::vector<planner::Polygon>& occluders) {
  for (const auto& poly : occluders) {
    for (std::size_t i = 0; i < poly.size(); ++i) {
      if (planner::segments_intersect(a, b, poly[i], poly[(i + 1) % poly.size()])) return false;
    }
  }
  return true;
}

}  // namespace coopsense::sim
