#pragma once

#include "coopsense/planner/behavior.hpp"
#include "coopsense/sim/scenario.hpp"
#include "coopsense/tracker/tracker.hpp"

#include <optional>
#include <vector>

namespace coopsense::sim {

struct RoadUserTruth {
  std::uint16_t id = 0;
  cpm::ObjectClass object_class = cpm::ObjectClass::unknown;
  Pose2 pose;
  bool sensed = false;          // reported by at least one sensing station
  bool locally_visible = false;  // in the receiver's own range and line of sight
};

struct TickLog {
  std::size_t tick = 0;
  double time = 0.0;
  Pose2 ego_true;
  Pose2 ego_believed;
  double ego_speed = 0.0;
  std::vector<RoadUserTruth> road_users;
  std::size_t messages_sent = 0;
  std::size_t message_bytes = 0;
  std::size_t messages_received = 0;
  std::vector<tracker::ClassTrack> tracks;
  std::optional<planner::Decision> decision;
  planner::PlannedPath path;
};

struct ScenarioLog {
  std::string name;
  std::uint64_t seed = 0;
  std::vector<TickLog> ticks;
  std::size_t dropped_out_of_order = 0;
};

/// Runs the scenario tick by tick: sensing stations observe road users and
/// publish encoded messages, the channel drops or delays them, the receiver
/// decodes, transforms, filters out itself, tracks, predicts and (when it has
/// a goal and a lane map) plans and moves. Identical inputs produce identical
/// logs. Throws std::invalid_argument for an invalid scenario.
ScenarioLog run_scenario(const Scenario& scenario);

/// Converts one received message into global-frame measurements using the
/// receiver's believed pose and localisation covariance.
std::vector<tracker::Measurement> measurements_from_message(const cpm::Cpm& message,
                                                            const geometry::GaussianPose2& receiver,
                                                            double timestamp);

}  // namespace coopsense::sim
