#include "coopsense/planner/cost_map.hpp"

#include "coopsense/geometry/ellipse.hpp"
#include "coopsense/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace coopsense::planner {

CostMap::CostMap(Point origin, double resolution, int width, int height, double occupied_threshold)
    : origin_(std::move(origin)),
      resolution_(resolution),
      width_(width),
      height_(height),
      threshold_(occupied_threshold) {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw std::invalid_argument("cost map resolution must be > 0");
  if (width <= 0 || height <= 0) throw std::invalid_argument("cost map needs at least one cell");
  cost_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
}

bool CostMap::contains(const Point& p) const {
  const auto c = cell_of(p);
  return in_bounds(c.x(), c.y());
}

Eigen::Vector2i CostMap::cell_of(const Point& p) const {
  return {static_cast<int>(std::floor((p.x() - origin_.x()) / resolution_)),
          static_cast<int>(std::floor((p.y() - origin_.y()) / resolution_))};
}

Point CostMap::cell_center(int ix, int iy) const {
  return {origin_.x() + (ix + 0.5) * resolution_, origin_.y() + (iy + 0.5) * resolution_};
}

double CostMap::cost_at(const Point& p) const {
  const auto c = cell_of(p);
  return in_bounds(c.x(), c.y()) ? at(c.x(), c.y()) : 1.0;
}

double inflation_radius_for(double length, double width) { return 0.25 * (length + width); }

bool ellipse_intersects_rect(const geometry::GaussianPose2& pose, double probability_mass, const Rect& rect) {
  const Point center{pose.mean.x, pose.mean.y};
  if (rect.contains(center)) return true;
  const auto e = geometry::confidence_ellipse(pose.cov.topLeftCorner<2, 2>(), center, probability_mass);
  const double c = std::cos(e.orientation);
  const double s = std::sin(e.orientation);
  // Rectangle corners inside the ellipse.
  const Point corners[4] = {rect.min, {rect.max.x(), rect.min.y()}, rect.max, {rect.min.x(), rect.max.y()}};
  for (const auto& corner : corners) {
    const Point d = corner - center;
    const double u = c * d.x() + s * d.y();
    const double v = -s * d.x() + c * d.y();
    const double a = std::max(e.semi_major, 1e-12);
    const double b = std::max(e.semi_minor, 1e-12);
    if ((u * u) / (a * a) + (v * v) / (b * b) <= 1.0) return true;
  }
  // Ellipse boundary inside the rectangle.
  constexpr int kSamples = 72;
  for (int k = 0; k < kSamples; ++k) {
    const double t = 2.0 * std::numbers::pi * k / kSamples;
    const double u = e.semi_major * std::cos(t);
    const double v = e.semi_minor * std::sin(t);
    if (rect.contains({center.x() + c * u - s * v, center.y() + s * u + c * v})) return true;
  }
  return false;
}

namespace {

void rasterise_lanes(const LaneMap& lane_map, const geometry::Pose2& ego, const CostMapConfig& config, CostMap& map) {
  const Point ego_dir{std::cos(ego.theta), std::sin(ego.theta)};
  const double line_halfwidth = 0.5 * map.resolution();
  for (int iy = 0; iy < map.height(); ++iy) {
    for (int ix = 0; ix < map.width(); ++ix) {
      const Point p = map.cell_center(ix, iy);
      double cost = 0.0;
      if (!lane_map.drivable.empty() && !lane_map.is_drivable(p)) {
        cost = config.off_road_cost;
      } else {
        if (const Lane* lane = lane_map.lane_at(p); lane != nullptr) {
          if (LaneMap::direction_at(*lane, p).dot(ego_dir) < 0.0) cost = config.opposite_lane_cost;
        }
        for (const auto& line : lane_map.dividing_lines) {
          if (distance_to_polyline(line.line, p) <= line_halfwidth) {
            cost = std::max(cost, line.crossable ? config.crossable_line_cost : config.solid_line_cost);
          }
        }
      }
      map.at(ix, iy) = cost;
    }
  }
}

void block_zone(const Rect& zone, CostMap& map) {
  for (int iy = 0; iy < map.height(); ++iy) {
    for (int ix = 0; ix < map.width(); ++ix) {
      if (zone.contains(map.cell_center(ix, iy))) map.at(ix, iy) = 1.0;
    }
  }
}

void stamp_ellipse(const geometry::GaussianPose2& pose, const CostMapConfig& config, CostMap& map) {
  const Point center{pose.mean.x, pose.mean.y};
  const auto e = geometry::confidence_ellipse(pose.cov.topLeftCorner<2, 2>(), center, config.probability_mass);
  const double a = std::max(e.semi_major + config.inflation_radius, 1e-6);
  const double b = std::max(e.semi_minor + config.inflation_radius, 1e-6);
  const double c = std::cos(e.orientation);
  const double s = std::sin(e.orientation);

  simd::EllipseFootprint f;
  f.cx = center.x();
  f.cy = center.y();
  f.a = c * c / (a * a) + s * s / (b * b);
  f.b = c * s * (1.0 / (a * a) - 1.0 / (b * b));
  f.c = s * s / (a * a) + c * c / (b * b);
  f.inside_cost = 1.0;
  f.falloff_peak = config.falloff_peak;
  f.falloff_sigma = config.falloff_sigma_cells * map.resolution();
  f.falloff_cutoff = config.falloff_cutoff_cells * map.resolution();

  const double reach = f.falloff_cutoff + map.resolution();
  const double hx = std::sqrt(a * a * c * c + b * b * s * s) + reach;
  const double hy = std::sqrt(a * a * s * s + b * b * c * c) + reach;
  const auto lo = map.cell_of(center - Point{hx, hy});
  const auto hi = map.cell_of(center + Point{hx, hy});
  const int x0 = std::max(lo.x(), 0);
  const int x1 = std::min(hi.x(), map.width() - 1);
  const int y0 = std::max(lo.y(), 0);
  const int y1 = std::min(hi.y(), map.height() - 1);
  if (x0 > x1 || y0 > y1) return;
  for (int iy = y0; iy <= y1; ++iy) {
    const Point first = map.cell_center(x0, iy);
    auto row = map.row(iy).subspan(static_cast<std::size_t>(x0), static_cast<std::size_t>(x1 - x0 + 1));
    simd::ellipse_cost_row(first.y(), first.x(), map.resolution(), f, row);
  }
}

}  // namespace

CostMap build_cost_map(const LaneMap& lane_map, std::span<const RoadUserFootprint> road_users,
                       const geometry::Pose2& ego, const CostMapConfig& config) {
  if (!(config.resolution > 0.0)) throw std::invalid_argument("cost map resolution must be > 0");
  if (!(config.extent > 0.0)) throw std::invalid_argument("cost map extent must be > 0");
  const double res = config.resolution;
  const int cells = static_cast<int>(std::ceil(config.extent / res - 1e-9));
  const Point origin{std::floor((ego.x - 0.5 * config.extent) / res) * res,
                     std::floor((ego.y - 0.5 * config.extent) / res) * res};
  CostMap map(origin, res, cells, cells, config.occupied_threshold);

  rasterise_lanes(lane_map, ego, config, map);

  for (const auto& zone : lane_map.crossing_zones) {
    bool blocked = false;
    for (const auto& user : road_users) {
      if (!user.vulnerable) continue;
      if (ellipse_intersects_rect(user.current, config.probability_mass, zone.area)) blocked = true;
      for (const auto& p : user.predictions) {
        if (blocked) break;
        blocked = ellipse_intersects_rect(p, config.probability_mass, zone.area);
      }
      if (blocked) break;
    }
    if (blocked) block_zone(zone.area, map);
  }

  for (const auto& user : road_users) {
    stamp_ellipse(user.current, config, map);
    for (const auto& p : user.predictions) stamp_ellipse(p, config, map);
  }
  return map;
}

}  // namespace coopsense::planner
