#pragma once

// Collective perception message: ITS PDU header plus management, station
// data, sensor information and perceived object containers.

#include "coopsense/geometry/pose.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace coopsense::cpm {

using geometry::GaussianPose2;

inline constexpr std::size_t kMaxSensors = 10;
inline constexpr std::size_t kMaxObjects = 255;

enum class StationType : std::uint8_t { irsu = 0, vehicle = 1 };
enum class SensorType : std::uint8_t { camera = 0, lidar = 1, fused = 2 };
enum class ObjectClass : std::uint8_t { pedestrian = 0, car = 1, cyclist = 2, unknown = 3 };

std::string_view to_string(StationType type);
std::string_view to_string(SensorType type);
std::string_view to_string(ObjectClass cls);
std::optional<ObjectClass> parse_object_class(std::string_view text);
std::optional<StationType> parse_station_type(std::string_view text);

/// Thrown when a message exceeds a container limit.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

struct CpmManagement {
  std::uint32_t station_id = 0;
  StationType station_type = StationType::irsu;
  std::uint64_t generation_time_ms = 0;
  GaussianPose2 reference_position;  // global frame, with self-localisation covariance

  bool operator==(const CpmManagement&) const = default;
};

/// Present when the originating station is a vehicle.
struct StationData {
  double heading = 0.0;
  double speed = 0.0;
  double length = 4.5;
  double width = 1.8;

  bool operator==(const StationData&) const = default;
};

struct SensorInformation {
  std::uint8_t sensor_id = 0;
  SensorType sensor_type = SensorType::fused;
  double range = 40.0;
  double fov_start = 0.0;
  double fov_end = 0.0;

  bool operator==(const SensorInformation&) const = default;
};

inline constexpr double kSpeedStdUnavailable = std::numeric_limits<double>::infinity();

struct PerceivedObject {
  std::uint16_t object_id = 0;
  ObjectClass object_class = ObjectClass::unknown;
  GaussianPose2 pose_in_station_frame;
  double speed = 0.0;
  double speed_std = kSpeedStdUnavailable;  // infinity when the sensor gives no speed
  double length = 0.5;
  double width = 0.5;

  bool operator==(const PerceivedObject&) const = default;
};

struct Cpm {
  CpmManagement management;
  std::optional<StationData> station_data;
  std::vector<SensorInformation> sensors;
  std::vector<PerceivedObject> objects;

  bool operator==(const Cpm&) const = default;

  /// Throws CapacityError on more than kMaxSensors sensors or kMaxObjects
  /// objects and std::invalid_argument on a violated field invariant.
  void validate() const;
};

}  // namespace coopsense::cpm
