#pragma once

// Hybrid A* over (x, y, heading) with forward circular-arc primitives. The
// closed set is discretised per (cell, heading bin); the pose kept for a
// node is the one it was first expanded with.

#include "coopsense/geometry/pose.hpp"
#include "coopsense/planner/cost_map.hpp"
#include "coopsense/planner/lane_map.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace coopsense::planner {

using geometry::Pose2;

struct VehicleParams {
  double wheelbase = 2.7;
  double max_steer = 0.5235987755982988;  // 30 deg
  double length = 4.5;
  double width = 1.8;
  double max_speed = 5.0;  // m/s

  double max_curvature() const;
};

struct PlannerConfig {
  int heading_bins = 72;
  double arc_cells = 2.0;             // primitive length in cells
  double cost_weight = 1.0;           // weight of the mean cell cost on edge length
  double turn_weight = 0.05;          // extra edge length per unit of |curvature| / max curvature
  double goal_tolerance_arcs = 0.75;  // goal radius in primitive lengths
  double goal_heading_tolerance = 0.5235987755982988;
  std::size_t max_expansions = 0;     // 0: unbounded
};

struct PlannedPath {
  std::vector<Pose2> poses;
  std::vector<double> speeds;
  bool feasible = false;
  double cost = 0.0;
  std::size_t expansions = 0;
};

/// Raised when the start pose lies in an occupied cell.
class InvalidStartError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kPrimitiveCount = 5;

struct Successor {
  Pose2 pose;
  double cost = 0.0;
  int primitive = 0;
};

/// The primitive graph searched by the planner, exposed so that other
/// searches can run over exactly the same edges.
class PrimitiveGraph {
 public:
  PrimitiveGraph(const CostMap& map, const VehicleParams& vehicle, const PlannerConfig& config);

  double arc_length() const { return arc_length_; }
  const std::array<double, kPrimitiveCount>& curvatures() const { return curvatures_; }
  std::size_t key_count() const;
  std::uint32_t key(const Pose2& pose) const;

  /// End pose of primitive `index` applied to `from`.
  Pose2 apply(const Pose2& from, int index) const;
  /// Valid successors of `from`: edges leaving the map or touching a cell at
  /// or above the occupied threshold are dropped. Returns the count written.
  int successors(const Pose2& from, std::array<Successor, kPrimitiveCount>& out) const;
  bool is_goal(const Pose2& pose, const Pose2& goal) const;
  double heuristic(const Pose2& pose, const Pose2& goal) const;

  const CostMap& map() const { return map_; }

 private:
  const CostMap& map_;
  PlannerConfig config_;
  double arc_length_;
  int samples_;
  std::array<double, kPrimitiveCount> curvatures_{};
};

/// Lowest-cost forward path from start to goal. Ties in the open list break
/// on (f, g, node key). Returns feasible=false when the goal is unreachable.
/// Throws InvalidStartError for an occupied start and std::invalid_argument
/// when start or goal lie outside the map.
PlannedPath plan(const CostMap& map, const Pose2& start, const Pose2& goal, const VehicleParams& vehicle,
                 const PlannerConfig& config = {});

/// Pose reached after driving `s` metres forward along an arc of the given
/// curvature.
Pose2 arc_point(const Pose2& from, double curvature, double s);

/// Spacing of the collision samples taken along a primitive, in cells.
inline constexpr double kCollisionSampleCells = 0.25;

/// Sum of straight-line distances between consecutive poses.
double path_length(const PlannedPath& path);

/// Lowers path speeds to the lane and crossing-zone limits of the map.
void apply_speed_limits(PlannedPath& path, const LaneMap& lane_map);

}  // namespace coopsense::planner
