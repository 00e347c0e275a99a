#include "coopsense/sim/engine.hpp"

#include "coopsense/cpm/codec.hpp"
#include "coopsense/geometry/unscented.hpp"
#include "coopsense/planner/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>

namespace coopsense::sim {

namespace {

constexpr double kAcceleration = 1.5;  // m/s^2
constexpr double kDeceleration = 2.5;  // m/s^2
constexpr double kStopMargin = 0.5;    // m between front bumper and stop line
constexpr double kGoalRadius = 1.0;    // m
constexpr std::uint16_t kStationObjectBase = 0xF000;

Eigen::Matrix3d diag_cov(double position_std, double heading_std) {
  return Eigen::Vector3d(position_std * position_std, position_std * position_std, heading_std * heading_std)
      .asDiagonal();
}

class Noise {
 public:
  explicit Noise(std::uint64_t seed) : rng_(seed) {}

  double gaussian(double std_dev) { return std_dev > 0.0 && std::isfinite(std_dev) ? std_dev * normal_(rng_) : 0.0; }
  bool lost(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p;
  }
  Pose2 perturb(const Pose2& p, double position_std, double heading_std) {
    const double dx = gaussian(position_std);
    const double dy = gaussian(position_std);
    const double dt = gaussian(heading_std);
    return {p.x + dx, p.y + dy, geometry::normalize_angle(p.theta + dt)};
  }

 private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

struct InFlight {
  std::size_t deliver_tick;
  std::vector<std::uint8_t> bytes;
};

Pose2 advance(const Pose2& p, double distance) {
  return {p.x + distance * std::cos(p.theta), p.y + distance * std::sin(p.theta), p.theta};
}

// Pose `distance` metres along the polyline of path poses.
Pose2 along_path(const std::vector<Pose2>& poses, double distance) {
  for (std::size_t i = 1; i < poses.size(); ++i) {
    const double len = std::hypot(poses[i].x - poses[i - 1].x, poses[i].y - poses[i - 1].y);
    if (distance <= len && len > 0.0) {
      const double f = distance / len;
      const double dtheta = geometry::normalize_angle(poses[i].theta - poses[i - 1].theta);
      return {poses[i - 1].x + f * (poses[i].x - poses[i - 1].x), poses[i - 1].y + f * (poses[i].y - poses[i - 1].y),
              geometry::normalize_angle(poses[i - 1].theta + f * dtheta)};
    }
    distance -= len;
  }
  return poses.back();
}

// Lowest path speed within braking reach of the start of the path.
double target_speed(const planner::PlannedPath& path, double speed, double dt) {
  const double reach = speed * speed / (2.0 * kDeceleration) + speed * dt + 1.0;
  double target = std::numeric_limits<double>::infinity();
  double travelled = 0.0;
  for (std::size_t i = 0; i < path.poses.size() && i < path.speeds.size(); ++i) {
    if (i > 0) travelled += std::hypot(path.poses[i].x - path.poses[i - 1].x, path.poses[i].y - path.poses[i - 1].y);
    if (travelled > reach) break;
    target = std::min(target, path.speeds[i]);
  }
  return std::isfinite(target) ? target : 0.0;
}

// Remainder of a path from the pose nearest to `ego` onwards.
planner::PlannedPath remaining(const planner::PlannedPath& path, const Pose2& ego) {
  if (path.poses.empty()) return path;
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.poses.size(); ++i) {
    const double d = std::hypot(path.poses[i].x - ego.x, path.poses[i].y - ego.y);
    if (d < best_distance) {
      best_distance = d;
      best = i;
    }
  }
  planner::PlannedPath out = path;
  out.poses.erase(out.poses.begin(), out.poses.begin() + static_cast<std::ptrdiff_t>(best));
  if (out.speeds.size() > best) out.speeds.erase(out.speeds.begin(), out.speeds.begin() + static_cast<std::ptrdiff_t>(best));
  return out;
}

Pose2 local_goal(const Pose2& ego, const Pose2& goal, const planner::CostMap& map) {
  const double margin = 1.0;
  const Point lo = map.origin() + Point{margin, margin};
  const Point hi = map.origin() + Point{map.width() * map.resolution() - margin, map.height() * map.resolution() - margin};
  if (goal.x >= lo.x() && goal.y >= lo.y() && goal.x <= hi.x() && goal.y <= hi.y()) return goal;
  const Point d{goal.x - ego.x, goal.y - ego.y};
  const double reach = 0.5 * std::min(map.width(), map.height()) * map.resolution() - 2.0;
  const Point p = Point{ego.x, ego.y} + d.normalized() * reach;
  return {p.x(), p.y(), goal.theta};
}

}  // namespace

std::vector<tracker::Measurement> measurements_from_message(const cpm::Cpm& message,
                                                            const geometry::GaussianPose2& receiver,
                                                            double timestamp) {
  std::vector<tracker::Measurement> out;
  out.reserve(message.objects.size());
  for (const auto& o : message.objects) {
    const auto local =
        geometry::transform_with_uncertainty(receiver, message.management.reference_position, o.pose_in_station_frame);
    const auto global = geometry::compose(receiver.mean, local);
    tracker::Measurement m;
    m.position = {global.mean.x, global.mean.y};
    m.heading = global.mean.theta;
    m.position_cov = global.cov.topLeftCorner<2, 2>();
    m.heading_var = global.cov(2, 2);
    m.heading_reliable = true;
    if (std::isfinite(o.speed_std)) {
      m.speed = o.speed;
      m.speed_var = o.speed_std * o.speed_std;
    }
    m.object_class = o.object_class;
    m.timestamp = timestamp;
    out.push_back(m);
  }
  return out;
}

ScenarioLog run_scenario(const Scenario& scenario) {
  scenario.validate();
  Noise noise(scenario.seed);
  tracker::MultiClassTracker tracks(scenario.tracker);
  std::deque<InFlight> channel;

  const StationSpec& rx = scenario.receiver();
  Pose2 ego = rx.pose;
  double ego_speed = rx.speed;
  const bool plans = rx.goal.has_value() && scenario.lane_map.has_value();
  std::optional<planner::PlannedPath> previous_path;
  bool arrived = false;

  ScenarioLog log;
  log.name = scenario.name;
  log.seed = scenario.seed;
  const auto ticks = static_cast<std::size_t>(std::floor(scenario.duration / scenario.tick + 1e-9)) + 1;
  log.ticks.reserve(ticks);

  for (std::size_t k = 0; k < ticks; ++k) {
    const double t = static_cast<double>(k) * scenario.tick;
    TickLog entry;
    entry.tick = k;
    entry.time = t;
    entry.ego_true = ego;
    entry.ego_speed = ego_speed;

    std::vector<Trajectory::State> users;
    for (const auto& u : scenario.road_users) {
      users.push_back(u.trajectory.at(t));
      RoadUserTruth truth;
      truth.id = u.id;
      truth.object_class = u.object_class;
      truth.pose = users.back().pose;
      const Point p{truth.pose.x, truth.pose.y};
      truth.locally_visible =
          (p - Point{ego.x, ego.y}).norm() <= rx.sensor_range && line_of_sight({ego.x, ego.y}, p, scenario.occluders);
      entry.road_users.push_back(truth);
    }

    // Sensing stations observe and publish.
    for (const auto& st : scenario.stations) {
      if (st.role != StationRole::sensing) continue;
      const Pose2 truth = advance(st.pose, st.speed * t);
      const Pose2 believed = noise.perturb(truth, st.position_std, st.heading_std);
      cpm::Cpm msg;
      msg.management.station_id = st.id;
      msg.management.station_type = st.type;
      msg.management.generation_time_ms = static_cast<std::uint64_t>(std::llround(t * 1000.0));
      msg.management.reference_position = {believed, diag_cov(st.position_std, st.heading_std)};
      if (st.type == cpm::StationType::vehicle) {
        msg.station_data = cpm::StationData{truth.theta, st.speed, st.vehicle.length, st.vehicle.width};
      }
      msg.sensors.push_back({0, cpm::SensorType::fused, st.sensor_range, -std::numbers::pi, std::numbers::pi});

      const auto observe = [&](std::uint16_t id, cpm::ObjectClass cls, const Pose2& pose, double speed,
                               const PerceptionNoise& sensing, double length, double width) {
        if (msg.objects.size() >= cpm::kMaxObjects) return false;
        const Point p{pose.x, pose.y};
        if ((p - Point{truth.x, truth.y}).norm() > st.sensor_range) return false;
        if (!line_of_sight({truth.x, truth.y}, p, scenario.occluders)) return false;
        const Pose2 rel = geometry::relative(truth, pose);
        cpm::PerceivedObject o;
        o.object_id = id;
        o.object_class = cls;
        o.pose_in_station_frame = {noise.perturb(rel, sensing.position_std, sensing.heading_std),
                                   diag_cov(sensing.position_std, sensing.heading_std)};
        if (std::isfinite(sensing.speed_std)) {
          o.speed = std::max(0.0, speed + noise.gaussian(sensing.speed_std));
          o.speed_std = sensing.speed_std;
        }
        o.length = length;
        o.width = width;
        msg.objects.push_back(o);
        return true;
      };
      for (std::size_t i = 0; i < scenario.road_users.size(); ++i) {
        const auto& u = scenario.road_users[i];
        if (observe(u.id, u.object_class, users[i].pose, users[i].speed, u.perception, u.length, u.width)) {
          entry.road_users[i].sensed = true;
        }
      }
      // Other vehicles are perceived like any road user.
      for (const auto& other : scenario.stations) {
        if (&other == &st || other.type != cpm::StationType::vehicle) continue;
        const bool is_rx = other.role == StationRole::receiving;
        const Pose2 pose = is_rx ? ego : advance(other.pose, other.speed * t);
        observe(static_cast<std::uint16_t>(kStationObjectBase + (other.id & 0x0FFF)), cpm::ObjectClass::car, pose,
                is_rx ? ego_speed : other.speed, scenario.vehicle_perception, other.vehicle.length,
                other.vehicle.width);
      }

      auto bytes = cpm::encode(msg);
      ++entry.messages_sent;
      entry.message_bytes += bytes.size();
      if (!noise.lost(scenario.channel.loss)) {
        channel.push_back({k + static_cast<std::size_t>(scenario.channel.latency_ticks), std::move(bytes)});
      }
    }

    // Receiver: localise, receive, track.
    const Pose2 believed = noise.perturb(ego, rx.position_std, rx.heading_std);
    const geometry::GaussianPose2 self{believed, diag_cov(rx.position_std, rx.heading_std)};
    entry.ego_believed = believed;
    while (!channel.empty() && channel.front().deliver_tick <= k) {
      const cpm::Cpm msg = cpm::decode(channel.front().bytes);
      channel.pop_front();
      ++entry.messages_received;
      const double stamp = static_cast<double>(msg.management.generation_time_ms) / 1000.0;
      auto measurements = measurements_from_message(msg, self, stamp);
      measurements = tracker::self_filter(measurements, self, scenario.self_filter_radius);
      tracks.step(stamp, measurements);
    }
    entry.tracks = tracks.tracks();

    // Plan and move.
    const double dt = scenario.tick;
    if (!plans) {
      ego = advance(ego, ego_speed * dt);
    } else {
      const Pose2& goal = *rx.goal;
      Pose2 target = believed;
      arrived = arrived || std::hypot(goal.x - believed.x, goal.y - believed.y) <= kGoalRadius;
      if (arrived) {
        ego_speed = std::max(0.0, ego_speed - kDeceleration * dt);
        entry.decision = planner::Decision::proceed;
        entry.path.poses = {believed};
        entry.path.speeds = {0.0};
        entry.path.feasible = true;
        target = advance(believed, ego_speed * dt);
      } else {
        std::vector<planner::RoadUserFootprint> footprints;
        for (const auto& ct : entry.tracks) {
          planner::RoadUserFootprint f;
          f.vulnerable = ct.object_class == cpm::ObjectClass::pedestrian || ct.object_class == cpm::ObjectClass::cyclist;
          f.current = planner::pose_marginal(ct.track.state, ct.track.cov);
          f.predictions = planner::predict_road_user(ct.track.state, ct.track.cov, scenario.prediction.horizon,
                                                     scenario.prediction.step, scenario.tracker);
          footprints.push_back(std::move(f));
        }
        const auto map = planner::build_cost_map(*scenario.lane_map, footprints, believed, scenario.cost_map);
        planner::PlannedPath path;
        try {
          path = planner::plan(map, believed, local_goal(believed, goal, map), rx.vehicle, scenario.planner);
        } catch (const planner::InvalidStartError&) {
          path = {};
        }
        planner::apply_speed_limits(path, *scenario.lane_map);
        const auto stop_line = planner::stop_line_ahead(*scenario.lane_map, believed);
        std::optional<planner::PlannedPath> before;
        if (previous_path) before = remaining(*previous_path, believed);
        const auto decision = planner::decide(path, map, stop_line, before ? &*before : nullptr);
        entry.decision = decision;

        if (!path.feasible) {
          double allowed = std::max(0.0, ego_speed - kDeceleration * dt);
          double free = std::numeric_limits<double>::infinity();
          if (decision == planner::Decision::give_way && stop_line) {
            const double d = planner::distance_to_stop_line(*stop_line, believed).value_or(0.0);
            free = std::max(0.0, d - 0.5 * rx.vehicle.length - kStopMargin);
            allowed = std::min(ego_speed + kAcceleration * dt, std::sqrt(2.0 * kDeceleration * free));
          }
          ego_speed = allowed;
          target = advance(believed, std::min(ego_speed * dt, free));
        } else {
          const double want = target_speed(path, ego_speed, dt);
          ego_speed = want > ego_speed ? std::min(want, ego_speed + kAcceleration * dt)
                                       : std::max(want, ego_speed - kDeceleration * dt);
          target = along_path(path.poses, ego_speed * dt);
        }
        entry.path = path;
        previous_path = std::move(path);
      }
      ego = geometry::compose(ego, geometry::relative(believed, target));
    }
    log.ticks.push_back(std::move(entry));
  }
  log.dropped_out_of_order = tracks.dropped_out_of_order();
  return log;
}

}  // namespace coopsense::sim
