#include "coopsense/planner/hybrid_astar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

namespace coopsense::planner {

using geometry::normalize_angle;

double VehicleParams::max_curvature() const { return std::tan(max_steer) / wheelbase; }

Pose2 arc_point(const Pose2& from, double curvature, double s) {
  if (std::abs(curvature) < 1e-12) {
    return {from.x + s * std::cos(from.theta), from.y + s * std::sin(from.theta), from.theta};
  }
  const double theta = from.theta + curvature * s;
  return {from.x + (std::sin(theta) - std::sin(from.theta)) / curvature,
          from.y + (std::cos(from.theta) - std::cos(theta)) / curvature, normalize_angle(theta)};
}

PrimitiveGraph::PrimitiveGraph(const CostMap& map, const VehicleParams& vehicle, const PlannerConfig& config)
    : map_(map), config_(config), arc_length_(config.arc_cells * map.resolution()) {
  if (config.heading_bins <= 0) throw std::invalid_argument("planner needs at least one heading bin");
  if (!(config.arc_cells > 0.0)) throw std::invalid_argument("primitive length must be > 0");
  if (!(config.turn_weight >= 0.0)) throw std::invalid_argument("turn weight must be >= 0");
  if (!(vehicle.wheelbase > 0.0) || !(vehicle.max_steer > 0.0) || !(vehicle.max_steer < std::numbers::pi / 2)) {
    throw std::invalid_argument("vehicle needs a positive wheelbase and a steering limit in (0, pi/2)");
  }
  samples_ = std::max(1, static_cast<int>(std::ceil(arc_length_ / (kCollisionSampleCells * map.resolution()) - 1e-9)));
  const double k = vehicle.max_curvature();
  curvatures_ = {0.0, 0.5 * k, -0.5 * k, k, -k};
}

std::size_t PrimitiveGraph::key_count() const {
  return static_cast<std::size_t>(map_.width()) * static_cast<std::size_t>(map_.height()) *
         static_cast<std::size_t>(config_.heading_bins);
}

std::uint32_t PrimitiveGraph::key(const Pose2& pose) const {
  const auto cell = map_.cell_of({pose.x, pose.y});
  const double bin_width = 2.0 * std::numbers::pi / config_.heading_bins;
  long bin = std::lround(normalize_angle(pose.theta) / bin_width) % config_.heading_bins;
  if (bin < 0) bin += config_.heading_bins;
  const auto cells = static_cast<std::uint32_t>(cell.y()) * static_cast<std::uint32_t>(map_.width()) +
                     static_cast<std::uint32_t>(cell.x());
  return cells * static_cast<std::uint32_t>(config_.heading_bins) + static_cast<std::uint32_t>(bin);
}

Pose2 PrimitiveGraph::apply(const Pose2& from, int index) const {
  return arc_point(from, curvatures_[static_cast<std::size_t>(index)], arc_length_);
}

int PrimitiveGraph::successors(const Pose2& from, std::array<Successor, kPrimitiveCount>& out) const {
  int n = 0;
  for (int p = 0; p < kPrimitiveCount; ++p) {
    const double kappa = curvatures_[static_cast<std::size_t>(p)];
    double sum = 0.0;
    bool valid = true;
    for (int i = 1; i <= samples_; ++i) {
      const Pose2 q = i == samples_ ? apply(from, p) : arc_point(from, kappa, arc_length_ * i / samples_);
      const auto cell = map_.cell_of({q.x, q.y});
      if (!map_.in_bounds(cell.x(), cell.y()) || map_.occupied(cell.x(), cell.y())) {
        valid = false;
        break;
      }
      sum += map_.at(cell.x(), cell.y());
    }
    if (!valid) continue;
    const double turn = config_.turn_weight * std::abs(kappa) / curvatures_[3];
    out[static_cast<std::size_t>(n++)] = {apply(from, p),
                                          arc_length_ * (1.0 + config_.cost_weight * sum / samples_ + turn), p};
  }
  return n;
}

bool PrimitiveGraph::is_goal(const Pose2& pose, const Pose2& goal) const {
  const double d = std::hypot(pose.x - goal.x, pose.y - goal.y);
  return d <= config_.goal_tolerance_arcs * arc_length_ &&
         std::abs(normalize_angle(pose.theta - goal.theta)) <= config_.goal_heading_tolerance;
}

double PrimitiveGraph::heuristic(const Pose2& pose, const Pose2& goal) const {
  const double dx = goal.x - pose.x;
  const double dy = goal.y - pose.y;
  const double d = std::hypot(dx, dy);
  const int n = std::max(1, static_cast<int>(std::ceil(d / map_.resolution())));
  double min_cost = 1.0;
  for (int i = 0; i <= n; ++i) {
    const double t = static_cast<double>(i) / n;
    min_cost = std::min(min_cost, map_.cost_at({pose.x + t * dx, pose.y + t * dy}));
  }
  // Distance left to the edge of the goal disc.
  const double remaining = std::max(0.0, d - config_.goal_tolerance_arcs * arc_length_);
  return remaining * (1.0 + config_.cost_weight * min_cost);
}

PlannedPath plan(const CostMap& map, const Pose2& start, const Pose2& goal, const VehicleParams& vehicle,
                 const PlannerConfig& config) {
  if (!start.is_finite() || !map.contains({start.x, start.y})) throw std::invalid_argument("planner: start outside the map");
  if (!goal.is_finite() || !map.contains({goal.x, goal.y})) throw std::invalid_argument("planner: goal outside the map");
  {
    const auto c = map.cell_of({start.x, start.y});
    if (map.occupied(c.x(), c.y())) throw InvalidStartError("planner: start lies in an occupied cell");
  }

  const PrimitiveGraph graph(map, vehicle, config);
  struct Entry {
    double f;
    double g;
    std::uint32_t key;
    std::uint32_t parent;
    std::int8_t primitive;
    Pose2 pose;
  };
  const auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g > b.g;
    return a.key > b.key;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);

  const std::size_t n = graph.key_count();
  std::vector<std::uint8_t> closed(n, 0);
  std::vector<double> best_g(n, std::numeric_limits<double>::infinity());
  std::vector<std::uint32_t> parent(n, 0);
  std::vector<std::int8_t> primitive(n, -1);

  const std::uint32_t start_key = graph.key(start);
  best_g[start_key] = 0.0;
  open.push({graph.heuristic(start, goal), 0.0, start_key, start_key, -1, start});

  PlannedPath path;
  std::array<Successor, kPrimitiveCount> next;
  while (!open.empty()) {
    const Entry e = open.top();
    open.pop();
    if (closed[e.key]) continue;
    closed[e.key] = 1;
    parent[e.key] = e.parent;
    primitive[e.key] = e.primitive;
    ++path.expansions;

    if (graph.is_goal(e.pose, goal)) {
      std::vector<int> sequence;
      for (std::uint32_t k = e.key; primitive[k] >= 0; k = parent[k]) sequence.push_back(primitive[k]);
      std::reverse(sequence.begin(), sequence.end());
      path.poses.push_back(start);
      for (const int p : sequence) path.poses.push_back(graph.apply(path.poses.back(), p));
      path.speeds.assign(path.poses.size(), vehicle.max_speed);
      path.feasible = true;
      path.cost = e.g;
      return path;
    }
    if (config.max_expansions != 0 && path.expansions >= config.max_expansions) break;

    const int count = graph.successors(e.pose, next);
    for (int i = 0; i < count; ++i) {
      const Successor& s = next[static_cast<std::size_t>(i)];
      const std::uint32_t k = graph.key(s.pose);
      if (closed[k]) continue;
      const double g = e.g + s.cost;
      if (g >= best_g[k]) continue;
      best_g[k] = g;
      open.push({g + graph.heuristic(s.pose, goal), g, k, e.key, static_cast<std::int8_t>(s.primitive), s.pose});
    }
  }
  return path;
}

double path_length(const PlannedPath& path) {
  double total = 0.0;
  for (std::size_t i = 1; i < path.poses.size(); ++i) {
    total += std::hypot(path.poses[i].x - path.poses[i - 1].x, path.poses[i].y - path.poses[i - 1].y);
  }
  return total;
}

void apply_speed_limits(PlannedPath& path, const LaneMap& lane_map) {
  for (std::size_t i = 0; i < path.poses.size() && i < path.speeds.size(); ++i) {
    if (const auto limit = lane_map.speed_limit_at({path.poses[i].x, path.poses[i].y})) {
      path.speeds[i] = std::min(path.speeds[i], *limit);
    }
  }
}

}  // namespace coopsense::planner
