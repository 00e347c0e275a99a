#pragma once

// Uniform-cost search over the planner's primitive graph: same edges, same
// per-key closed set, no heuristic. Reference for path-cost checks.

#include "coopsense/planner/hybrid_astar.hpp"

#include <limits>
#include <queue>
#include <vector>

namespace oracle {

struct DijkstraResult {
  bool found = false;
  double cost = std::numeric_limits<double>::infinity();
};

inline DijkstraResult dijkstra(const coopsense::planner::PrimitiveGraph& graph, const coopsense::planner::Pose2& start,
                               const coopsense::planner::Pose2& goal) {
  using coopsense::planner::Pose2;
  struct Item {
    double g;
    std::uint32_t key;
    Pose2 pose;
  };
  auto later = [](const Item& a, const Item& b) { return a.g != b.g ? a.g > b.g : a.key > b.key; };
  std::priority_queue<Item, std::vector<Item>, decltype(later)> open(later);
  std::vector<bool> closed(graph.key_count(), false);
  std::vector<double> best(graph.key_count(), std::numeric_limits<double>::infinity());
  const auto k0 = graph.key(start);
  best[k0] = 0.0;
  open.push({0.0, k0, start});
  std::array<coopsense::planner::Successor, coopsense::planner::kPrimitiveCount> next;
  while (!open.empty()) {
    const Item it = open.top();
    open.pop();
    if (closed[it.key]) continue;
    closed[it.key] = true;
    if (graph.is_goal(it.pose, goal)) return {true, it.g};
    const int n = graph.successors(it.pose, next);
    for (int i = 0; i < n; ++i) {
      const auto& s = next[static_cast<std::size_t>(i)];
      const auto k = graph.key(s.pose);
      if (closed[k]) continue;
      const double g = it.g + s.cost;
      if (g >= best[k]) continue;
      best[k] = g;
      open.push({g, k, s.pose});
    }
  }
  return {};
}

}  // namespace oracle

#include <cmath>
#include <random>

namespace oracle {

struct RandomPlanningCase {
  coopsense::planner::CostMap map;
  coopsense::planner::Pose2 start;
  coopsense::planner::Pose2 goal;
};

/// n x n cells at 0.5 m: random background cost below the occupied
/// threshold, disc obstacles, and start/goal poses on free ground facing
/// each other.
inline RandomPlanningCase random_planning_case(int n, std::uint64_t seed) {
  using coopsense::planner::CostMap;
  using coopsense::planner::Point;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double res = 0.5, side = n * res;
  CostMap map(Point(0, 0), res, n, n);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) map.at(ix, iy) = 0.4 * u(rng);
  const int discs = n / 8;
  for (int k = 0; k < discs; ++k) {
    const Point c(u(rng) * side, u(rng) * side);
    const double r = 1.0 + 3.0 * u(rng);
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        if ((map.cell_center(ix, iy) - c).norm() <= r) map.at(ix, iy) = 1.0;
  }
  auto clear = [&](const Point& p) {
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix)
        if ((map.cell_center(ix, iy) - p).norm() <= 2.0 && map.occupied(ix, iy)) return false;
    return true;
  };
  Point a, b;
  do {
    a = Point(3.0 + u(rng) * (side - 6.0), 3.0 + u(rng) * (side - 6.0));
    b = Point(3.0 + u(rng) * (side - 6.0), 3.0 + u(rng) * (side - 6.0));
  } while ((a - b).norm() < side / 3.0 || !clear(a) || !clear(b));
  const double heading = std::atan2(b.y() - a.y(), b.x() - a.x());
  return {std::move(map), {a.x(), a.y(), heading}, {b.x(), b.y(), heading}};
}

}  // namespace oracle
