#include "coopsense/geometry/pose.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>

namespace coopsense::geometry {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double normalize_angle(double angle) {
  // Same expression as the batch kernels so that scalar and batch paths agree bitwise.
  return angle - kTwoPi * std::ceil((angle - std::numbers::pi) / kTwoPi);
}

double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

bool Pose2::is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(theta); }

Pose2 Pose2::from_vector(const Eigen::Vector3d& v) { return {v.x(), v.y(), normalize_angle(v.z())}; }

void validate_covariance(const Eigen::Matrix3d& cov, std::string_view what) {
  if (!cov.allFinite()) {
    throw std::invalid_argument(std::string(what) + " covariance has non-finite entries");
  }
  if (((cov - cov.transpose()).cwiseAbs().array() > kSymmetryTolerance).any()) {
    throw std::invalid_argument(std::string(what) + " covariance is not symmetric");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kPsdTolerance) {
    throw std::invalid_argument(std::string(what) + " covariance is not positive semi-definite");
  }
}

void validate(const GaussianPose2& pose, std::string_view what) {
  if (!pose.mean.is_finite()) {
    throw std::invalid_argument(std::string(what) + " pose is not finite");
  }
  validate_covariance(pose.cov, what);
}

Eigen::Matrix3d homogeneous(const Pose2& pose) {
  if (!pose.is_finite()) throw std::invalid_argument("homogeneous: pose is not finite");
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  Eigen::Matrix3d t;
  t << c, -s, pose.x,
       s, c, pose.y,
       0.0, 0.0, 1.0;
  return t;
}

Pose2 trans(const Pose2& receiver, const Pose2& sender, const Pose2& object_in_sender) {
  if (!receiver.is_finite() || !sender.is_finite() || !object_in_sender.is_finite()) {
    throw std::invalid_argument("trans: pose is not finite");
  }
  // T(receiver)^-1 * T(sender) * p, written out so the rotation inverse is exact.
  const double cs = std::cos(sender.theta);
  const double ss = std::sin(sender.theta);
  const double gx = sender.x + (cs * object_in_sender.x - ss * object_in_sender.y);
  const double gy = sender.y + (ss * object_in_sender.x + cs * object_in_sender.y);
  const double dx = gx - receiver.x;
  const double dy = gy - receiver.y;
  const double cr = std::cos(receiver.theta);
  const double sr = std::sin(receiver.theta);
  return {cr * dx + sr * dy, cr * dy - sr * dx,
          normalize_angle((object_in_sender.theta + sender.theta) - receiver.theta)};
}

Pose2 compose(const Pose2& frame, const Pose2& local) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  return {frame.x + c * local.x - s * local.y, frame.y + s * local.x + c * local.y,
          normalize_angle(frame.theta + local.theta)};
}

Pose2 relative(const Pose2& frame, const Pose2& global) {
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  const double dx = global.x - frame.x;
  const double dy = global.y - frame.y;
  return {c * dx + s * dy, c * dy - s * dx, normalize_angle(global.theta - frame.theta)};
}

GaussianPose2 compose(const Pose2& frame, const GaussianPose2& local) {
  Eigen::Matrix3d rot = Eigen::Matrix3d::Identity();
  const double c = std::cos(frame.theta);
  const double s = std::sin(frame.theta);
  rot(0, 0) = c;
  rot(0, 1) = -s;
  rot(1, 0) = s;
  rot(1, 1) = c;
  GaussianPose2 out;
  out.mean = compose(frame, local.mean);
  out.cov = rot * local.cov * rot.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

}  // namespace coopsense::geometry
