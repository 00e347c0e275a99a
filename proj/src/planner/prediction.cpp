#include "coopsense/planner/prediction.hpp"

#include <cmath>
#include <stdexcept>

namespace coopsense::planner {

geometry::GaussianPose2 pose_marginal(const tracker::TargetState& state, const tracker::StateMatrix& cov) {
  geometry::GaussianPose2 out;
  out.mean = {state.x, state.y, geometry::normalize_angle(state.heading)};
  out.cov = cov.topLeftCorner<3, 3>();
  return out;
}

std::vector<geometry::GaussianPose2> predict_road_user(const tracker::TargetState& state,
                                                       const tracker::StateMatrix& cov, double horizon, double step,
                                                       const tracker::TrackerParams& process) {
  if (!(horizon >= 0.0)) throw std::invalid_argument("prediction horizon must be >= 0");
  if (!(step > 0.0)) throw std::invalid_argument("prediction step must be > 0");

  tracker::TrackerParams params = process;
  params.p_survival = 1.0;
  std::vector<tracker::GaussianComponent> current{{1.0, state.vector(), cov, std::nullopt}};

  std::vector<geometry::GaussianPose2> out;
  const auto count = static_cast<std::size_t>(std::floor(horizon / step + 1e-9));
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    current = tracker::predict(current, step, params);
    out.push_back(pose_marginal(tracker::TargetState::from_vector(current.front().mean), current.front().cov));
  }
  return out;
}

}  // namespace coopsense::planner
