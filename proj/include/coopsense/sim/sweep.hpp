#pragma once

// Uncertainty sweep: a static sensing station reports a line of static road
// users; a receiving vehicle at several longitudinal offsets transforms them
// into its own frame for each value of one localisation parameter.

#include "coopsense/geometry/ellipse.hpp"
#include "coopsense/geometry/pose.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coopsense::sim {

using geometry::GaussianPose2;
using geometry::Pose2;

/// V2I: the sender is a roadside unit with near-exact localisation.
/// V2V: the sender's localisation covariance equals the receiver's.
enum class SensingMode { v2i, v2v };
enum class SweepParameter { receiver_heading_std, receiver_position_std };

std::string_view to_string(SensingMode mode);
std::string_view to_string(SweepParameter parameter);

struct SweepSpec {
  std::string name = "sweep";
  SweepParameter parameter = SweepParameter::receiver_heading_std;
  // Heading values in radians, position values in metres.
  std::vector<double> values;
  double receiver_position_std = 0.25;
  double receiver_heading_std = 0.008726646259971648;  // 0.5 deg
  std::vector<SensingMode> modes{SensingMode::v2i, SensingMode::v2v};
  // Positive offsets put the receiver west of the sender.
  std::vector<double> offsets{50.0, -50.0, -150.0};

  Pose2 sender{100.0, 100.0, 0.0};
  double receiver_y = 75.0;
  double receiver_heading = 0.0;
  double irsu_position_std = 0.005;
  double irsu_heading_std = 1e-4;

  int object_count = 20;
  double object_spacing = 5.0;
  double object_first = 5.0;
  double object_position_std = 0.5;
  double object_heading_std = 0.10471975511965977;  // 6 deg

  double probability_mass = 0.95;
  std::size_t monte_carlo_samples = 0;  // 0 skips the sampling reference
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument for an empty or non-positive value list,
  /// no modes, no offsets or a non-positive object count.
  void validate() const;

  /// Receiver pose for one offset.
  Pose2 receiver_at(double offset) const;
  /// Object poses in the sender frame; index 0 is the sender itself.
  std::vector<GaussianPose2> objects_in_sender() const;
  GaussianPose2 receiver_estimate(double value, double offset) const;
  GaussianPose2 sender_estimate(SensingMode mode, double value) const;
};

struct SweepRecord {
  SensingMode mode = SensingMode::v2i;
  std::size_t value_index = 0;
  double value = 0.0;
  std::size_t offset_index = 0;
  double offset = 0.0;
  std::size_t object_index = 0;  // 0: the sensing station
  double range_to_receiver = 0.0;
  double range_to_sender = 0.0;
  Pose2 truth_in_receiver;
  GaussianPose2 transformed;
  geometry::ConfidenceEllipse ellipse;
  std::optional<GaussianPose2> reference;  // sampling reference, when requested
};

struct SweepResult {
  SweepSpec spec;
  // Ordered by (mode, value, offset, object) in spec order.
  std::vector<SweepRecord> records;

  std::vector<const SweepRecord*> combination(SensingMode mode, std::size_t value_index,
                                              std::size_t offset_index) const;
};

/// Parallelism used by run_sweep when `threads` is 0: COOPSENSE_THREADS when
/// set to a positive integer, otherwise the hardware concurrency.
unsigned default_thread_count();

/// Runs every (mode, value, offset) combination; combinations execute in
/// parallel and are merged by key, so the result does not depend on the
/// thread count.
SweepResult run_sweep(const SweepSpec& spec, unsigned threads = 0);

}  // namespace coopsense::sim
