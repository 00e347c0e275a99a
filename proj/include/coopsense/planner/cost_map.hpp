#pragma once

#include "coopsense/geometry/pose.hpp"
#include "coopsense/planner/lane_map.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace coopsense::planner {

/// Row-major grid of traversal costs in [0, 1]. Cell (ix, iy) covers
/// [origin + (ix, iy) * resolution, origin + (ix + 1, iy + 1) * resolution).
class CostMap {
 public:
  CostMap(Point origin, double resolution, int width, int height, double occupied_threshold = 0.7);

  const Point& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double occupied_threshold() const { return threshold_; }

  bool in_bounds(int ix, int iy) const { return ix >= 0 && iy >= 0 && ix < width_ && iy < height_; }
  bool contains(const Point& p) const;
  /// Cell containing p; may be out of bounds.
  Eigen::Vector2i cell_of(const Point& p) const;
  Point cell_center(int ix, int iy) const;

  double at(int ix, int iy) const { return cost_[index(ix, iy)]; }
  double& at(int ix, int iy) { return cost_[index(ix, iy)]; }
  /// Cost of the cell containing p; 1.0 outside the map.
  double cost_at(const Point& p) const;
  bool occupied(int ix, int iy) const { return at(ix, iy) >= threshold_; }

  std::span<double> row(int iy) { return {cost_.data() + index(0, iy), static_cast<std::size_t>(width_)}; }
  const std::vector<double>& data() const { return cost_; }

 private:
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(ix);
  }

  Point origin_;
  double resolution_;
  int width_;
  int height_;
  double threshold_;
  std::vector<double> cost_;
};

struct CostMapConfig {
  double extent = 60.0;      // side length of the square map, m
  double resolution = 0.5;   // m per cell
  double occupied_threshold = 0.7;
  double off_road_cost = 1.0;
  double opposite_lane_cost = 0.35;
  double crossable_line_cost = 0.15;
  double solid_line_cost = 1.0;
  double probability_mass = 0.95;
  // Added to both ellipse semi-axes to account for the ego footprint.
  double inflation_radius = 1.575;
  double falloff_peak = 0.6;
  double falloff_sigma_cells = 1.0;
  double falloff_cutoff_cells = 2.0;
};

/// Half of the mean of the vehicle's length and width envelope.
double inflation_radius_for(double length, double width);

/// A road user as seen by the cost map: current estimate plus predictions.
struct RoadUserFootprint {
  bool vulnerable = true;  // pedestrians and cyclists can block crossing zones
  geometry::GaussianPose2 current;
  std::vector<geometry::GaussianPose2> predictions;
};

/// Rasterises lane structure and road users around `ego`. The map is
/// axis-aligned, `extent` wide and snapped to the resolution grid. Throws
/// std::invalid_argument for a non-positive resolution or extent.
CostMap build_cost_map(const LaneMap& lane_map, std::span<const RoadUserFootprint> road_users,
                       const geometry::Pose2& ego, const CostMapConfig& config = {});

/// True when the confidence ellipse of `pose` (at the given mass) and the
/// rectangle overlap.
bool ellipse_intersects_rect(const geometry::GaussianPose2& pose, double probability_mass, const Rect& rect);

}  // namespace coopsense::planner
