#include "coopsense/cpm/message.hpp"

#include <cmath>
#include <string>

namespace coopsense::cpm {

std::string_view to_string(StationType type) {
  switch (type) {
    case StationType::irsu:
      return "IRSU";
    case StationType::vehicle:
      return "Vehicle";
  }
  return "?";
}

std::string_view to_string(SensorType type) {
  switch (type) {
    case SensorType::camera:
      return "camera";
    case SensorType::lidar:
      return "lidar";
    case SensorType::fused:
      return "fused";
  }
  return "?";
}

std::string_view to_string(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::pedestrian:
      return "pedestrian";
    case ObjectClass::car:
      return "car";
    case ObjectClass::cyclist:
      return "cyclist";
    case ObjectClass::unknown:
      return "unknown";
  }
  return "?";
}

std::optional<ObjectClass> parse_object_class(std::string_view text) {
  if (text == "pedestrian") return ObjectClass::pedestrian;
  if (text == "car") return ObjectClass::car;
  if (text == "cyclist") return ObjectClass::cyclist;
  if (text == "unknown") return ObjectClass::unknown;
  return std::nullopt;
}

std::optional<StationType> parse_station_type(std::string_view text) {
  if (text == "IRSU" || text == "irsu") return StationType::irsu;
  if (text == "CAV" || text == "cav" || text == "Vehicle" || text == "vehicle") return StationType::vehicle;
  return std::nullopt;
}

void Cpm::validate() const {
  if (sensors.size() > kMaxSensors) {
    throw CapacityError("cpm: " + std::to_string(sensors.size()) + " sensor containers exceed the limit of " +
                        std::to_string(kMaxSensors));
  }
  if (objects.size() > kMaxObjects) {
    throw CapacityError("cpm: " + std::to_string(objects.size()) + " perceived objects exceed the limit of " +
                        std::to_string(kMaxObjects));
  }
  geometry::validate(management.reference_position, "reference position");
  if (station_data) {
    if (!(station_data->speed >= 0.0)) throw std::invalid_argument("cpm: station speed must be non-negative");
    if (!(station_data->length > 0.0) || !(station_data->width > 0.0)) {
      throw std::invalid_argument("cpm: station dimensions must be positive");
    }
  }
  for (const auto& s : sensors) {
    if (!(s.range > 0.0)) throw std::invalid_argument("cpm: sensor range must be positive");
  }
  for (const auto& o : objects) {
    geometry::validate(o.pose_in_station_frame, "perceived object");
    if (!(o.speed >= 0.0)) throw std::invalid_argument("cpm: object speed must be non-negative");
    if (!(o.speed_std >= 0.0)) throw std::invalid_argument("cpm: object speed std must be non-negative");
  }
}

}  // namespace coopsense::cpm
