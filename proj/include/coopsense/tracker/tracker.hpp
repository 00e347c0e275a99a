#pragma once

#include "coopsense/tracker/gm_phd.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace coopsense::tracker {

/// One GM-PHD filter for one road-user class. Stepped at message arrival
/// times; a message older than the filter time is dropped and counted.
/// Not thread-safe; distinct instances may run on distinct threads.
class GmPhdTracker {
 public:
  explicit GmPhdTracker(ObjectClass object_class, TrackerParams params = {});

  /// Advances to `time` and fuses `measurements`. Returns false (and counts a
  /// drop) when `time` lies before the filter time. Throws
  /// std::invalid_argument when a measurement belongs to another class.
  bool step(double time, std::span<const Measurement> measurements);

  ObjectClass object_class() const { return class_; }
  const std::vector<Track>& tracks() const { return tracks_; }
  const std::vector<GaussianComponent>& components() const { return components_; }
  std::optional<double> time() const { return time_; }
  std::size_t dropped_out_of_order() const { return dropped_; }
  const TrackerParams& params() const { return params_; }

 private:
  ObjectClass class_;
  TrackerParams params_;
  std::vector<GaussianComponent> components_;
  std::vector<Track> tracks_;
  TrackIdAllocator ids_;
  std::optional<double> time_;
  std::size_t dropped_ = 0;
};

struct ClassTrack {
  ObjectClass object_class = ObjectClass::unknown;
  Track track;
};

/// Routes measurements to one tracker per road-user class; the instances
/// never exchange components.
class MultiClassTracker {
 public:
  explicit MultiClassTracker(TrackerParams params = {});

  /// Splits `measurements` by class and steps every class that has a tracker
  /// or a measurement. Classes without measurements still see an empty update.
  void step(double time, std::span<const Measurement> measurements);

  std::vector<ClassTrack> tracks() const;
  const GmPhdTracker* tracker(ObjectClass cls) const;
  std::size_t dropped_out_of_order() const;

 private:
  TrackerParams params_;
  std::map<ObjectClass, GmPhdTracker> trackers_;
};

}  // namespace coopsense::tracker
