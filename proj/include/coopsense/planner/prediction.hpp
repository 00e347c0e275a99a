#pragma once

#include "coopsense/geometry/pose.hpp"
#include "coopsense/tracker/gm_phd.hpp"

#include <vector>

namespace coopsense::planner {

struct PredictionConfig {
  double horizon = 1.5;  // s
  double step = 0.5;     // s
};

/// Constant-velocity extrapolation of a tracked road user. Returns one pose
/// per multiple of `step` up to and including `horizon` (within 1e-9 s); the
/// covariance follows the tracker's linearised process model. Throws
/// std::invalid_argument for a negative horizon or a non-positive step.
std::vector<geometry::GaussianPose2> predict_road_user(const tracker::TargetState& state,
                                                       const tracker::StateMatrix& cov, double horizon, double step,
                                                       const tracker::TrackerParams& process = {});

/// Position/heading marginal of a tracker state.
geometry::GaussianPose2 pose_marginal(const tracker::TargetState& state, const tracker::StateMatrix& cov);

}  // namespace coopsense::planner
