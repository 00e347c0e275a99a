#pragma once

// Gaussian-mixture PHD filter over (x, y, heading, speed) with a constant
// velocity motion model, measurement-driven birth and persistent track ids.

#include "coopsense/cpm/message.hpp"
#include "coopsense/geometry/pose.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace coopsense::tracker {

using cpm::ObjectClass;
using StateVector = Eigen::Vector4d;
using StateMatrix = Eigen::Matrix4d;
using TrackId = std::uint32_t;

struct TargetState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;

  StateVector vector() const { return {x, y, heading, speed}; }
  static TargetState from_vector(const StateVector& v) { return {v(0), v(1), v(2), v(3)}; }
};

struct GaussianComponent {
  double weight = 0.0;
  StateVector mean = StateVector::Zero();
  StateMatrix cov = StateMatrix::Identity();
  std::optional<TrackId> track_id;
};

/// Frame-transformed perceived object.
struct Measurement {
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  double heading = 0.0;
  Eigen::Matrix2d position_cov = Eigen::Matrix2d::Identity();
  double heading_var = 0.0;
  bool heading_reliable = true;
  std::optional<double> speed;  // fused only when present
  double speed_var = 0.0;
  ObjectClass object_class = ObjectClass::unknown;
  double timestamp = 0.0;
};

struct TrackerParams {
  double p_survival = 0.99;
  double p_detect = 0.9;
  double clutter_density = 1e-4;  // per m^2
  double birth_weight = 0.2;
  double prune_threshold = 1e-5;
  double merge_distance = 2.0;  // Mahalanobis distance, not squared
  double confirm_weight = 0.5;
  std::size_t max_components = 200;

  // White-noise intensities of the heading rate and the acceleration.
  double heading_noise_std = 0.2;  // rad per sqrt(s)
  double speed_noise_std = 0.5;    // m/s per sqrt(s)

  // Birth prior on speed when the measurement carries none.
  double birth_speed_std = 1.5;
  // Span of the speed dimension used to normalise the clutter intensity.
  double speed_span = 20.0;
};

struct Track {
  TrackId id = 0;
  TargetState state;
  StateMatrix cov = StateMatrix::Zero();
  double weight = 0.0;
};

/// Hands out track ids; ids are never reused.
class TrackIdAllocator {
 public:
  TrackId next() { return next_++; }
  TrackId peek() const { return next_; }

 private:
  TrackId next_ = 1;
};

/// Constant-velocity prediction: x += v cos(h) dt, y += v sin(h) dt; the
/// covariance goes through the Jacobian plus the discretised white-noise
/// process model, weights are scaled by p_survival. dt == 0 is a no-op.
std::vector<GaussianComponent> predict(std::span<const GaussianComponent> components, double dt,
                                       const TrackerParams& params);

/// GM-PHD measurement update. Missed-detection copies carry (1 - p_detect)
/// of the prior weight; every measurement adds Kalman-updated copies
/// normalised against clutter plus the total detection likelihood, and a
/// birth component when clutter dominates that normaliser. Throws
/// std::invalid_argument for non-finite or non-PSD measurement covariances.
std::vector<GaussianComponent> update(std::span<const GaussianComponent> components,
                                      std::span<const Measurement> measurements, const TrackerParams& params);

/// Drops light components, merges close ones (weight-averaged moments) and
/// caps the mixture at max_components, heaviest first.
std::vector<GaussianComponent> prune_and_merge(std::span<const GaussianComponent> components,
                                               const TrackerParams& params);

/// Components at or above confirm_weight become tracks. Unlabelled confirmed
/// components receive a fresh id (written back into `components`); an id is
/// reported once, by its heaviest component.
std::vector<Track> extract_tracks(std::vector<GaussianComponent>& components, const TrackerParams& params,
                                  TrackIdAllocator& ids);

/// Removes measurements within `exclusion_radius` (inclusive) of the ego
/// position.
std::vector<Measurement> self_filter(std::span<const Measurement> measurements, const geometry::GaussianPose2& ego,
                                     double exclusion_radius);

/// Normalises a state so the speed is non-negative (a negative speed becomes
/// a heading flip) and the heading lies in (-pi, pi].
void canonicalize(GaussianComponent& component);

}  // namespace coopsense::tracker
