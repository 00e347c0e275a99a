#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <string_view>

namespace coopsense::geometry {

/// Raised when a computation leaves its numeric domain, e.g. a covariance
/// that is not positive semi-definite.
class NumericDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Wraps an angle to (-pi, pi].
double normalize_angle(double angle);

double deg_to_rad(double deg);
double rad_to_deg(double rad);

/// Planar pose (x, y in metres, theta in radians). Producers keep theta in
/// (-pi, pi].
struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  bool operator==(const Pose2&) const = default;

  bool is_finite() const;
  Eigen::Vector3d vector() const { return {x, y, theta}; }
  static Pose2 from_vector(const Eigen::Vector3d& v);
};

/// Pose with a 3x3 covariance over (x, y, theta).
struct GaussianPose2 {
  Pose2 mean;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();

  bool operator==(const GaussianPose2& other) const { return mean == other.mean && cov == other.cov; }
};

inline constexpr double kSymmetryTolerance = 1e-9;
inline constexpr double kPsdTolerance = 1e-9;

/// Throws std::invalid_argument naming `what` when the covariance is not
/// symmetric, has a non-finite entry or an eigenvalue below -kPsdTolerance.
void validate_covariance(const Eigen::Matrix3d& cov, std::string_view what);
void validate(const GaussianPose2& pose, std::string_view what);

/// Homogeneous transform [[c, -s, x], [s, c, y], [0, 0, 1]].
Eigen::Matrix3d homogeneous(const Pose2& pose);

/// Expresses an object observed in the sender frame in the receiver frame,
/// given both frames' poses in a common global frame.
Pose2 trans(const Pose2& receiver, const Pose2& sender, const Pose2& object_in_sender);

/// Composes a pose expressed in `frame` into the frame's parent.
Pose2 compose(const Pose2& frame, const Pose2& local);

/// Inverse of compose: expresses a parent-frame pose in `frame`.
Pose2 relative(const Pose2& frame, const Pose2& global);

/// Rigidly re-expresses a Gaussian pose given in `frame` into the parent
/// frame, treating the frame pose as exact.
GaussianPose2 compose(const Pose2& frame, const GaussianPose2& local);

}  // namespace coopsense::geometry
