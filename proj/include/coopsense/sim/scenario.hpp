#pragma once

#include "coopsense/cpm/message.hpp"
#include "coopsense/geometry/pose.hpp"
#include "coopsense/planner/cost_map.hpp"
#include "coopsense/planner/hybrid_astar.hpp"
#include "coopsense/planner/lane_map.hpp"
#include "coopsense/planner/prediction.hpp"
#include "coopsense/tracker/gm_phd.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace coopsense::sim {

using geometry::Pose2;
using planner::Point;

enum class StationRole { sensing, receiving };

struct StationSpec {
  std::string name;
  std::uint32_t id = 0;
  StationRole role = StationRole::sensing;
  cpm::StationType type = cpm::StationType::irsu;
  Pose2 pose;
  double speed = 0.0;  // along the heading, m/s
  double position_std = 0.0;
  double heading_std = 0.0;  // rad
  double sensor_range = 40.0;
  // Receiving vehicles with a goal and a lane map plan their own motion.
  std::optional<Pose2> goal;
  planner::VehicleParams vehicle;
};

/// Ground-truth motion of a road user.
struct Trajectory {
  enum class Kind { fixed, waypoints, figure_eight };

  Kind kind = Kind::fixed;
  std::vector<Point> points;  // fixed: one point; waypoints: the polyline
  double heading = 0.0;       // fixed only
  double speed = 0.0;         // m/s along the path
  double start_time = 0.0;    // waypoints: motion begins here
  Point center = Point::Zero();  // figure_eight
  double half_width = 10.0;      // figure_eight lobe extents
  double half_height = 5.0;

  struct State {
    Pose2 pose;
    double speed = 0.0;
  };

  /// Throws std::invalid_argument on a malformed specification.
  void validate() const;
  State at(double time) const;
};

/// Noise of a sensing station's observation of one road user.
struct PerceptionNoise {
  double position_std = 0.5;
  double heading_std = 0.10471975511965977;  // 6 deg
  double speed_std = 0.3;  // infinity: the sensor reports no speed
};

struct RoadUserSpec {
  std::uint16_t id = 0;
  cpm::ObjectClass object_class = cpm::ObjectClass::pedestrian;
  Trajectory trajectory;
  PerceptionNoise perception;
  double length = 0.5;
  double width = 0.5;
};

struct ChannelSpec {
  double loss = 0.0;
  int latency_ticks = 0;
};

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  double duration = 10.0;
  double tick = 0.1;
  std::vector<StationSpec> stations;
  std::vector<RoadUserSpec> road_users;
  ChannelSpec channel;
  std::optional<planner::LaneMap> lane_map;
  std::vector<planner::Polygon> occluders;
  // Used when a sensing station observes another vehicle station.
  PerceptionNoise vehicle_perception;

  planner::CostMapConfig cost_map;
  planner::PlannerConfig planner;
  planner::PredictionConfig prediction;
  tracker::TrackerParams tracker;
  double self_filter_radius = 2.5;

  /// Throws std::invalid_argument unless there is exactly one receiving
  /// station, tick > 0, duration >= 0 and every part is well formed.
  void validate() const;

  const StationSpec& receiver() const;
};

/// True when the segment from a to b crosses no occluder edge.
bool line_of_sight(const Point& a, const Point& b, const std::vector<planner::Polygon>& occluders);

}  // namespace coopsense::sim
