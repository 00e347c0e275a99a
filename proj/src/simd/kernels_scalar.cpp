#include "coopsense/simd/kernels.hpp"

#include <cmath>
#include <numbers>

namespace coopsense::simd::scalar {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Wrap to (-pi, pi].
inline double wrap(double t) {
  return t - kTwoPi * std::ceil((t - std::numbers::pi) / kTwoPi);
}

}  // namespace

void sincos(std::span<const double> angle, std::span<double> sin_out, std::span<double> cos_out) {
  for (std::size_t i = 0; i < angle.size(); ++i) {
    sin_out[i] = std::sin(angle[i]);
    cos_out[i] = std::cos(angle[i]);
  }
}

void transform_batch(const FrameColumns& receiver, const FrameColumns& sender,
                     ConstPoseColumns object, PoseColumns out) {
  const std::size_t n = object.x.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double cs = sender.cos_theta[i];
    const double ss = sender.sin_theta[i];
    const double gx = sender.x[i] + (cs * object.x[i] - ss * object.y[i]);
    const double gy = sender.y[i] + (ss * object.x[i] + cs * object.y[i]);
    const double dx = gx - receiver.x[i];
    const double dy = gy - receiver.y[i];
    const double cr = receiver.cos_theta[i];
    const double sr = receiver.sin_theta[i];
    out.x[i] = cr * dx + sr * dy;
    out.y[i] = cr * dy - sr * dx;
    out.theta[i] = wrap((object.theta[i] + sender.theta[i]) - receiver.theta[i]);
  }
}

FirstMoments first_moments(ConstPoseColumns poses, std::span<const double> sin_theta,
                           std::span<const double> cos_theta) {
  FirstMoments m;
  for (std::size_t i = 0; i < poses.x.size(); ++i) {
    m.sum_x += poses.x[i];
    m.sum_y += poses.y[i];
    m.sum_sin += sin_theta[i];
    m.sum_cos += cos_theta[i];
  }
  return m;
}

SecondMoments central_moments(ConstPoseColumns poses, double mean_x, double mean_y, double mean_theta) {
  SecondMoments m;
  for (std::size_t i = 0; i < poses.x.size(); ++i) {
    const double dx = poses.x[i] - mean_x;
    const double dy = poses.y[i] - mean_y;
    const double dt = wrap(poses.theta[i] - mean_theta);
    m.xx += dx * dx;
    m.xy += dx * dy;
    m.xt += dx * dt;
    m.yy += dy * dy;
    m.yt += dy * dt;
    m.tt += dt * dt;
  }
  return m;
}

void ellipse_cost_row(double y, double x0, double dx, const EllipseFootprint& f,
                      std::span<double> costs) {
  const double ry = y - f.cy;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    const double rx = (x0 + dx * static_cast<double>(i)) - f.cx;
    const double q = f.a * rx * rx + 2.0 * f.b * rx * ry + f.c * ry * ry;
    double cost = 0.0;
    if (q <= 1.0) {
      cost = f.inside_cost;
    } else {
      const double delta = std::sqrt(rx * rx + ry * ry) * (1.0 - 1.0 / std::sqrt(q));
      if (delta <= f.falloff_cutoff) {
        const double u = delta / f.falloff_sigma;
        cost = f.falloff_peak * std::exp(-0.5 * u * u);
      }
    }
    if (cost > costs[i]) costs[i] = cost;
  }
}

}  // namespace coopsense::simd::scalar
