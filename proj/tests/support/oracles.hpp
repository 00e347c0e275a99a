#pragma once

// Test-side reference computations, written independently of the library
// code paths they check.

#include "coopsense/geometry/pose.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

using coopsense::geometry::GaussianPose2;
using coopsense::geometry::Pose2;

inline double wrap(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a <= 0.0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

/// Object pose seen from the receiver, written out with explicit rotations.
inline Pose2 hand_trans(const Pose2& r, const Pose2& s, const Pose2& o) {
  const double gx = s.x + std::cos(s.theta) * o.x - std::sin(s.theta) * o.y;
  const double gy = s.y + std::sin(s.theta) * o.x + std::cos(s.theta) * o.y;
  const double dx = gx - r.x;
  const double dy = gy - r.y;
  return {std::cos(r.theta) * dx + std::sin(r.theta) * dy, -std::sin(r.theta) * dx + std::cos(r.theta) * dy,
          wrap(o.theta + s.theta - r.theta)};
}

/// Symmetric square root via eigen-decomposition; tolerates singular input.
inline Eigen::Matrix3d sqrt_psd(const Eigen::Matrix3d& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  const Eigen::Vector3d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Plain sampling estimate of the transformed pose: one draw per input
/// Gaussian per sample, circular heading mean, wrapped residuals.
inline GaussianPose2 sample_transform(const GaussianPose2& r, const GaussianPose2& s, const GaussianPose2& o,
                                      std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  const Eigen::Matrix3d lr = sqrt_psd(r.cov), ls = sqrt_psd(s.cov), lo = sqrt_psd(o.cov);
  auto draw = [&](const GaussianPose2& g, const Eigen::Matrix3d& l) {
    const Eigen::Vector3d e(z(rng), z(rng), z(rng));
    const Eigen::Vector3d v = l * e;
    return Pose2{g.mean.x + v(0), g.mean.y + v(1), g.mean.theta + v(2)};
  };
  std::vector<Pose2> out(n);
  double sx = 0, sy = 0, ss = 0, sc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Pose2 pr = draw(r, lr), ps = draw(s, ls), po = draw(o, lo);
    out[i] = hand_trans(pr, ps, po);
    sx += out[i].x;
    sy += out[i].y;
    ss += std::sin(out[i].theta);
    sc += std::cos(out[i].theta);
  }
  const double dn = static_cast<double>(n);
  GaussianPose2 g;
  g.mean = {sx / dn, sy / dn, std::atan2(ss, sc)};
  Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
  for (const auto& p : out) {
    const Eigen::Vector3d d(p.x - g.mean.x, p.y - g.mean.y, wrap(p.theta - g.mean.theta));
    c += d * d.transpose();
  }
  g.cov = c / (dn - 1.0);
  return g;
}

inline double frobenius_relative(const Eigen::Matrix3d& a, const Eigen::Matrix3d& reference) {
  const double n = reference.norm();
  return n > 0.0 ? (a - reference).norm() / n : (a - reference).norm();
}

}  // namespace oracle
