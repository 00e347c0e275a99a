#include "coopsense/tracker/tracker.hpp"

#include <stdexcept>
#include <string>

namespace coopsense::tracker {

GmPhdTracker::GmPhdTracker(ObjectClass object_class, TrackerParams params)
    : class_(object_class), params_(params) {}

bool GmPhdTracker::step(double time, std::span<const Measurement> measurements) {
  for (const auto& m : measurements) {
    if (m.object_class != class_) {
      throw std::invalid_argument("tracker: " + std::string(cpm::to_string(m.object_class)) +
                                  " measurement routed to the " + std::string(cpm::to_string(class_)) + " tracker");
    }
  }
  if (time_ && time < *time_) {
    ++dropped_;
    return false;
  }
  const double dt = time_ ? time - *time_ : 0.0;
  time_ = time;
  components_ = predict(components_, dt, params_);
  components_ = update(components_, measurements, params_);
  components_ = prune_and_merge(components_, params_);
  tracks_ = extract_tracks(components_, params_, ids_);
  return true;
}

MultiClassTracker::MultiClassTracker(TrackerParams params) : params_(params) {}

void MultiClassTracker::step(double time, std::span<const Measurement> measurements) {
  std::map<ObjectClass, std::vector<Measurement>> by_class;
  for (const auto& m : measurements) by_class[m.object_class].push_back(m);
  for (const auto& [cls, list] : by_class) {
    if (trackers_.find(cls) == trackers_.end()) trackers_.emplace(cls, GmPhdTracker(cls, params_));
  }
  for (auto& [cls, tracker] : trackers_) {
    const auto it = by_class.find(cls);
    if (it == by_class.end()) {
      tracker.step(time, {});
    } else {
      tracker.step(time, it->second);
    }
  }
}

std::vector<ClassTrack> MultiClassTracker::tracks() const {
  std::vector<ClassTrack> out;
  for (const auto& [cls, tracker] : trackers_) {
    for (const auto& t : tracker.tracks()) out.push_back({cls, t});
  }
  return out;
}

const GmPhdTracker* MultiClassTracker::tracker(ObjectClass cls) const {
  const auto it = trackers_.find(cls);
  return it == trackers_.end() ? nullptr : &it->second;
}

std::size_t MultiClassTracker::dropped_out_of_order() const {
  std::size_t n = 0;
  for (const auto& [cls, tracker] : trackers_) n += tracker.dropped_out_of_order();
  return n;
}

}  // namespace coopsense::tracker
