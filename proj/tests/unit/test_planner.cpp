#include "coopsense/planner/behavior.hpp"
#include "coopsense/planner/prediction.hpp"

#include "planner_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace coopsense::planner;
using coopsense::geometry::GaussianPose2;

namespace {

constexpr double kPi = std::numbers::pi;

Polygon rect_polygon(double x0, double y0, double x1, double y1) { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }

// Two-lane road along +x: eastbound centred on y = 2, westbound on y = 6.
LaneMap two_lane_road(bool crossable) {
  LaneMap m;
  m.drivable.push_back(rect_polygon(0, 0, 120, 8));
  m.lanes.push_back({"east", {{0, 2}, {120, 2}}, 4.0, 5.0});
  m.lanes.push_back({"west", {{120, 6}, {0, 6}}, 4.0, 5.0});
  m.dividing_lines.push_back({{{0, 4}, {120, 4}}, crossable});
  return m;
}

// Single carriageway with a pedestrian crossing and a stop line before it.
LaneMap crossing_road() {
  LaneMap m;
  m.drivable.push_back(rect_polygon(0, 0, 55, 7));
  m.lanes.push_back({"east", {{0, 1.75}, {55, 1.75}}, 3.5, 2.78});
  m.lanes.push_back({"west", {{55, 5.25}, {0, 5.25}}, 3.5, 2.78});
  m.dividing_lines.push_back({{{0, 3.5}, {55, 3.5}}, false});
  m.crossing_zones.push_back({{{35, 0}, {39, 7}}, 2.0});
  m.stop_lines.push_back({{34, 0}, {34, 3.5}});
  return m;
}

GaussianPose2 pose(double x, double y, double theta, double pos_std) {
  GaussianPose2 g;
  g.mean = {x, y, theta};
  g.cov = Eigen::Vector3d(pos_std * pos_std, pos_std * pos_std, 0.01).asDiagonal();
  return g;
}

// Curvature of the circular arc joining two poses.
double segment_curvature(const Pose2& a, const Pose2& b) {
  const double chord = std::hypot(b.x - a.x, b.y - a.y);
  const double dtheta = coopsense::geometry::normalize_angle(b.theta - a.theta);
  return 2.0 * std::abs(std::sin(dtheta / 2.0)) / chord;
}

void expect_kinematically_feasible(const PlannedPath& path, const VehicleParams& v) {
  for (std::size_t i = 1; i < path.poses.size(); ++i) {
    EXPECT_LE(segment_curvature(path.poses[i - 1], path.poses[i]), v.max_curvature() + 1e-9) << "segment " << i;
  }
}

}  // namespace

TEST(PlannerPrediction, ConstantVelocityExamples) {
  coopsense::tracker::TargetState s{0, 0, 0, 2.0};
  const auto cov = coopsense::tracker::StateMatrix::Identity() * 0.01;
  const auto p = predict_road_user(s, cov, 1.5, 0.5);
  ASSERT_EQ(p.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(p[static_cast<std::size_t>(i)].mean.x, 1.0 + i, 1e-12);
    EXPECT_NEAR(p[static_cast<std::size_t>(i)].mean.y, 0.0, 1e-12);
  }
  EXPECT_TRUE(predict_road_user(s, cov, 0.0, 0.5).empty());
  EXPECT_THROW(predict_road_user(s, cov, -1.0, 0.5), std::invalid_argument);
  EXPECT_THROW(predict_road_user(s, cov, 1.0, 0.0), std::invalid_argument);
}

TEST(PlannerPrediction, StationaryUserGrowsCovariance) {
  coopsense::tracker::TargetState s{3, 4, 1.0, 0.0};
  const auto p = predict_road_user(s, coopsense::tracker::StateMatrix::Identity() * 0.01, 1.5, 0.5);
  ASSERT_EQ(p.size(), 3u);
  double prev = 0.01;
  for (const auto& g : p) {
    EXPECT_DOUBLE_EQ(g.mean.x, 3.0);
    EXPECT_DOUBLE_EQ(g.mean.y, 4.0);
    const double trace = g.cov.topLeftCorner<2, 2>().trace();
    EXPECT_GT(trace, prev);
    prev = trace;
  }
}

TEST(PlannerCostMap, EmptyRoadOnlyOffRoadOccupied) {
  const LaneMap m = two_lane_road(true);
  const CostMap map = build_cost_map(m, {}, {30, 2, 0});
  for (int iy = 0; iy < map.height(); ++iy) {
    for (int ix = 0; ix < map.width(); ++ix) {
      const Point c = map.cell_center(ix, iy);
      EXPECT_EQ(map.occupied(ix, iy), !m.is_drivable(c)) << c.transpose();
    }
  }
  EXPECT_EQ(map.cost_at({30, 2}), 0.0);
  EXPECT_DOUBLE_EQ(map.cost_at({30, 6}), CostMapConfig{}.opposite_lane_cost);
  EXPECT_THROW(build_cost_map(m, {}, {30, 2, 0}, CostMapConfig{.resolution = 0.0}), std::invalid_argument);
}

TEST(PlannerCostMap, OppositeLaneUserLeavesEgoLaneUnchanged) {
  const LaneMap m = two_lane_road(true);
  const std::vector<RoadUserFootprint> users{{true, pose(30, 7.0, kPi, 0.1), {}}};
  const CostMap clear = build_cost_map(m, {}, {30, 2, 0});
  const CostMap with = build_cost_map(m, users, {30, 2, 0});
  bool touched = false;
  for (int iy = 0; iy < clear.height(); ++iy) {
    for (int ix = 0; ix < clear.width(); ++ix) {
      const Point c = clear.cell_center(ix, iy);
      if (c.y() > 0 && c.y() < 4) {
        EXPECT_EQ(clear.at(ix, iy), with.at(ix, iy)) << c.transpose();
      }
      touched = touched || clear.at(ix, iy) != with.at(ix, iy);
    }
  }
  EXPECT_TRUE(touched);
  EXPECT_TRUE(with.occupied(with.cell_of({30, 7}).x(), with.cell_of({30, 7}).y()));
}

TEST(PlannerCostMap, InflatedEllipseIsOccupied) {
  const LaneMap m = two_lane_road(true);
  CostMapConfig cfg;
  const std::vector<RoadUserFootprint> users{{true, pose(40, 2, 0, 0.5), {}}};
  const CostMap map = build_cost_map(m, users, {30, 2, 0}, cfg);
  // 95% radius of a 0.5 m circle plus the inflation radius; sample far
  // enough inside that the whole containing cell is covered.
  const double r = 0.5 * std::sqrt(-2.0 * std::log(0.05)) + cfg.inflation_radius;
  for (double a = 0; a < 2 * kPi; a += 0.3) {
    const Point p(40 + 0.85 * r * std::cos(a), 2 + 0.85 * r * std::sin(a));
    if (p.y() > 0.2) {
      EXPECT_GE(map.cost_at(p), cfg.occupied_threshold) << p.transpose();
    }
  }
  EXPECT_DOUBLE_EQ(inflation_radius_for(4.5, 1.8), 1.575);
}

TEST(PlannerCostMap, PedestrianInCrossingBlocksWholeZone) {
  const LaneMap m = crossing_road();
  RoadUserFootprint ped{true, pose(37, -3, kPi / 2, 0.3), {pose(37, -1.5, kPi / 2, 0.4), pose(37, 0.5, kPi / 2, 0.5)}};
  const CostMap map = build_cost_map(m, std::vector{ped}, {25, 1.75, 0});
  for (double x = 35.25; x < 39; x += 0.5) {
    for (double y = 0.25; y < 7; y += 0.5) EXPECT_EQ(map.cost_at({x, y}), 1.0) << x << "," << y;
  }

  // A car in the same spot does not close the crossing.
  ped.vulnerable = false;
  const CostMap car = build_cost_map(m, std::vector{ped}, {25, 1.75, 0});
  EXPECT_LT(car.cost_at({38.75, 6.25}), 1.0);
}

TEST(PlannerSearch, StraightRunOnEmptyMap) {
  CostMap map({0, 0}, 0.5, 80, 40);
  const VehicleParams v;
  const auto path = plan(map, {5, 10, 0}, {25, 10, 0}, v);
  ASSERT_TRUE(path.feasible);
  EXPECT_NEAR(path_length(path), 20.0, 0.2);
  for (const auto& p : path.poses) EXPECT_NEAR(p.y, 10.0, 0.5);
  expect_kinematically_feasible(path, v);
}

TEST(PlannerSearch, NoWeaveWhenGoalFallsBetweenPrimitives) {
  // Goal 19.5 m ahead of a slightly skewed start: a straight run ends half a
  // primitive from it on either side.
  CostMap map({0, 0}, 0.5, 80, 40);
  const VehicleParams v;
  const Pose2 start{5.0, 10.05, 0.8 * kPi / 180.0};
  const auto path = plan(map, start, {24.5, 10, 0}, v);
  ASSERT_TRUE(path.feasible);
  for (const auto& p : path.poses) EXPECT_NEAR(p.theta, start.theta, 1e-12);
}

TEST(PlannerGraph, TurningPrimitivesCostMore) {
  CostMap map({0, 0}, 0.5, 40, 40);
  for (int iy = 0; iy < 40; ++iy) {
    for (int ix = 0; ix < 40; ++ix) map.at(ix, iy) = 0.2;
  }
  PlannerConfig cfg;
  cfg.turn_weight = 0.1;
  const VehicleParams v;
  const PrimitiveGraph graph(map, v, cfg);
  std::array<Successor, kPrimitiveCount> next;
  ASSERT_EQ(graph.successors({10, 10, 0}, next), kPrimitiveCount);
  const double arc = cfg.arc_cells * 0.5;
  for (const auto& s : next) {
    const double bend = std::abs(graph.curvatures()[static_cast<std::size_t>(s.primitive)]) / v.max_curvature();
    EXPECT_NEAR(s.cost, arc * (1.0 + 0.2 + 0.1 * bend), 1e-12) << "primitive " << s.primitive;
  }
  cfg.turn_weight = -1.0;
  EXPECT_THROW(PrimitiveGraph(map, v, cfg), std::invalid_argument);
}

TEST(PlannerSearch, OvertakesAcrossCrossableLine) {
  const LaneMap m = two_lane_road(true);
  const std::vector<RoadUserFootprint> users{{true, pose(38, 2.5, kPi / 2, 0.3), {}}};
  const Pose2 ego{25, 2, 0};
  const CostMap map = build_cost_map(m, users, ego);
  const VehicleParams v;
  const auto path = plan(map, ego, {52, 2, 0}, v);
  ASSERT_TRUE(path.feasible);
  double max_y = 0.0;
  for (const auto& p : path.poses) max_y = std::max(max_y, p.y);
  EXPECT_GT(max_y, 4.0);
  EXPECT_NEAR(path.poses.back().y, 2.0, 0.6);
  EXPECT_FALSE(path_blocked(path, map));
  expect_kinematically_feasible(path, v);

  // A solid line leaves no way round.
  const CostMap solid = build_cost_map(two_lane_road(false), users, ego);
  EXPECT_FALSE(plan(solid, ego, {52, 2, 0}, v).feasible);
}

TEST(PlannerSearch, BlockedCrossingIsInfeasible) {
  const LaneMap m = crossing_road();
  const RoadUserFootprint ped{true, pose(37, 3, kPi / 2, 0.3), {}};
  const Pose2 ego{25, 1.75, 0};
  const CostMap map = build_cost_map(m, std::vector{ped}, ego);
  const auto path = plan(map, ego, {50, 1.75, 0}, VehicleParams{});
  EXPECT_FALSE(path.feasible);
  EXPECT_EQ(decide(path, map, stop_line_ahead(m, {ego.x, ego.y, ego.theta})), Decision::give_way);
}

TEST(PlannerSearch, InvalidStartAndBounds) {
  CostMap map({0, 0}, 0.5, 40, 40);
  map.at(4, 4) = 1.0;
  EXPECT_THROW(plan(map, {2.2, 2.2, 0}, {15, 15, 0}, VehicleParams{}), InvalidStartError);
  EXPECT_THROW(plan(map, {-1, 2, 0}, {15, 15, 0}, VehicleParams{}), std::invalid_argument);
  EXPECT_THROW(plan(map, {5, 5, 0}, {25, 15, 0}, VehicleParams{}), std::invalid_argument);
}

TEST(PlannerSearch, Deterministic) {
  const auto c = oracle::random_planning_case(80, 4);
  const auto a = plan(c.map, c.start, c.goal, VehicleParams{});
  const auto b = plan(c.map, c.start, c.goal, VehicleParams{});
  ASSERT_EQ(a.poses.size(), b.poses.size());
  for (std::size_t i = 0; i < a.poses.size(); ++i) {
    EXPECT_EQ(a.poses[i].x, b.poses[i].x);
    EXPECT_EQ(a.poses[i].y, b.poses[i].y);
    EXPECT_EQ(a.poses[i].theta, b.poses[i].theta);
  }
  EXPECT_EQ(a.cost, b.cost);
}

TEST(PlannerSearch, NearDijkstraOnRandomMaps) {
  const VehicleParams v;
  const PlannerConfig cfg;
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto c = oracle::random_planning_case(100, seed);
    const auto path = plan(c.map, c.start, c.goal, v, cfg);
    const auto ref = oracle::dijkstra(PrimitiveGraph(c.map, v, cfg), c.start, c.goal);
    ASSERT_EQ(path.feasible, ref.found) << "seed " << seed;
    if (!ref.found) continue;
    EXPECT_LE(path.cost, 1.05 * ref.cost) << "seed " << seed;
    EXPECT_FALSE(path_blocked(path, c.map)) << "seed " << seed;
    expect_kinematically_feasible(path, v);
  }
}

TEST(PlannerSpeeds, LimitedByLaneAndCrossing) {
  const LaneMap m = crossing_road();
  PlannedPath p;
  p.poses = {{10, 1.75, 0}, {37, 1.75, 0}, {60, 1.75, 0}};
  p.speeds = {5.0, 5.0, 5.0};
  apply_speed_limits(p, m);
  EXPECT_DOUBLE_EQ(p.speeds[0], 2.78);
  EXPECT_DOUBLE_EQ(p.speeds[1], 2.0);
  EXPECT_DOUBLE_EQ(p.speeds[2], 5.0);
}

TEST(PlannerDecide, Examples) {
  CostMap map({0, 0}, 0.5, 40, 40);
  PlannedPath ok;
  ok.feasible = true;
  ok.poses = {{2, 2, 0}, {10, 2, 0}};
  EXPECT_EQ(decide(ok, map, std::nullopt), Decision::proceed);

  PlannedPath none;
  const StopLine line{{12, 0}, {12, 4}};
  EXPECT_EQ(decide(none, map, line), Decision::give_way);
  EXPECT_EQ(decide(none, map, std::nullopt), Decision::replan);

  // The earlier plan now runs through an occupied cell.
  map.at(map.cell_of({6, 2}).x(), map.cell_of({6, 2}).y()) = 1.0;
  PlannedPath detour = ok;
  detour.poses = {{2, 2, 0}, {6, 5, 0}, {10, 2, 0}};
  EXPECT_TRUE(path_blocked(ok, map));
  EXPECT_EQ(decide(detour, map, std::nullopt, &ok), Decision::replan);
  EXPECT_EQ(decide(detour, map, std::nullopt, &detour), Decision::proceed);
}

TEST(PlannerDecide, StopLineOnlyAhead) {
  const LaneMap m = crossing_road();
  EXPECT_TRUE(stop_line_ahead(m, {20, 1.75, 0}).has_value());
  EXPECT_FALSE(stop_line_ahead(m, {40, 1.75, 0}).has_value());
  EXPECT_NEAR(*distance_to_stop_line(m.stop_lines[0], {20, 1.75, 0}), 14.0, 1e-12);
}

TEST(LaneMapTest, ValidateRejectsStrayCrossing) {
  LaneMap m = crossing_road();
  EXPECT_NO_THROW(m.validate());
  m.crossing_zones.push_back({{{100, 100}, {104, 104}}, std::nullopt});
  EXPECT_THROW(m.validate(), std::invalid_argument);
}
