#pragma once

#include "coopsense/planner/cost_map.hpp"
#include "coopsense/planner/hybrid_astar.hpp"
#include "coopsense/planner/lane_map.hpp"

#include <optional>
#include <string_view>

namespace coopsense::planner {

enum class Decision { proceed, give_way, replan };

std::string_view to_string(Decision decision);

/// True when any pose of the path, or the straight segment between two
/// consecutive poses, touches a cell at or above the occupied threshold.
bool path_blocked(const PlannedPath& path, const CostMap& map);

/// Nearest stop line whose midpoint lies ahead of `ego` (positive projection
/// on its heading).
std::optional<StopLine> stop_line_ahead(const LaneMap& lane_map, const Pose2& ego);

/// Decision for the current planning cycle.
/// GiveWay: the new plan is infeasible and a stop line lies ahead.
/// Replan: the new plan is infeasible without a stop line, the previous plan
/// was infeasible, or the previous plan now crosses an occupied cell.
/// Proceed otherwise.
Decision decide(const PlannedPath& current, const CostMap& map, const std::optional<StopLine>& stop_line,
                const PlannedPath* previous = nullptr);

/// Distance along the ego heading to the stop line, or nullopt when the line
/// is behind.
std::optional<double> distance_to_stop_line(const StopLine& line, const Pose2& ego);

}  // namespace coopsense::planner
