#include "coopsense/sim/monte_carlo.hpp"

#include "coopsense/simd/kernels.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace coopsense::sim {

namespace {

constexpr std::size_t kChunk = 1 << 15;

// Symmetric square root factor of a PSD covariance (negative eigenvalues from
// round-off are clamped).
Eigen::Matrix3d sqrt_factor(const Eigen::Matrix3d& cov) {
  if (cov.isZero(0.0)) return Eigen::Matrix3d::Zero();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  const Eigen::Vector3d s = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * s.asDiagonal();
}

struct FrameBuffer {
  std::vector<double> x, y, theta, c, s;

  explicit FrameBuffer(std::size_t n) : x(n), y(n), theta(n), c(n), s(n) {}

  simd::FrameColumns columns(std::size_t n) const {
    return {{x.data(), n}, {y.data(), n}, {theta.data(), n}, {c.data(), n}, {s.data(), n}};
  }
};

void draw_poses(const GaussianPose2& g, const Eigen::Matrix3d& factor, const std::vector<double>& z0,
                const std::vector<double>& z1, const std::vector<double>& z2, std::size_t n, double* x, double* y,
                double* theta) {
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d d = factor * Eigen::Vector3d(z0[i], z1[i], z2[i]);
    x[i] = g.mean.x + d(0);
    y[i] = g.mean.y + d(1);
    theta[i] = g.mean.theta + d(2);
  }
}

// Running sums about a fixed reference pose (the first sample).
struct Accumulator {
  bool has_reference = false;
  geometry::Pose2 reference;
  simd::FirstMoments first;
  simd::SecondMoments second;
  double sum_theta = 0.0;  // arithmetic sum of wrapped heading offsets
};

}  // namespace

std::vector<GaussianPose2> monte_carlo_reference_batch(const GaussianPose2& receiver, const GaussianPose2& sender,
                                                       std::span<const GaussianPose2> objects,
                                                       std::size_t n_samples, std::uint64_t seed) {
  if (n_samples == 0) throw std::invalid_argument("monte carlo: n_samples must be >= 1");
  geometry::validate(receiver, "receiver");
  geometry::validate(sender, "sender");
  for (const auto& o : objects) geometry::validate(o, "object");

  const Eigen::Matrix3d lr = sqrt_factor(receiver.cov);
  const Eigen::Matrix3d ls = sqrt_factor(sender.cov);
  std::vector<Eigen::Matrix3d> lo;
  for (const auto& o : objects) lo.push_back(sqrt_factor(o.cov));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t chunk = std::min(kChunk, n_samples);
  FrameBuffer rf(chunk), sf(chunk);
  std::vector<std::vector<double>> z(9, std::vector<double>(chunk));
  std::vector<double> ox(chunk), oy(chunk), ot(chunk), tx(chunk), ty(chunk), tt(chunk), sn(chunk), cs(chunk);
  std::vector<Accumulator> acc(objects.size());

  for (std::size_t done = 0; done < n_samples;) {
    const std::size_t n = std::min(chunk, n_samples - done);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& column : z) column[i] = normal(rng);
    }
    draw_poses(receiver, lr, z[0], z[1], z[2], n, rf.x.data(), rf.y.data(), rf.theta.data());
    draw_poses(sender, ls, z[3], z[4], z[5], n, sf.x.data(), sf.y.data(), sf.theta.data());
    simd::sincos({rf.theta.data(), n}, {rf.s.data(), n}, {rf.c.data(), n});
    simd::sincos({sf.theta.data(), n}, {sf.s.data(), n}, {sf.c.data(), n});

    for (std::size_t k = 0; k < objects.size(); ++k) {
      draw_poses(objects[k], lo[k], z[6], z[7], z[8], n, ox.data(), oy.data(), ot.data());
      simd::transform_batch(rf.columns(n), sf.columns(n), {{ox.data(), n}, {oy.data(), n}, {ot.data(), n}},
                            {{tx.data(), n}, {ty.data(), n}, {tt.data(), n}});
      Accumulator& a = acc[k];
      if (!a.has_reference) {
        a.reference = {tx[0], ty[0], tt[0]};
        a.has_reference = true;
      }
      for (std::size_t i = 0; i < n; ++i) {
        tx[i] -= a.reference.x;
        ty[i] -= a.reference.y;
        tt[i] = geometry::normalize_angle(tt[i] - a.reference.theta);
        a.sum_theta += tt[i];
      }
      simd::sincos({tt.data(), n}, {sn.data(), n}, {cs.data(), n});
      const auto f = simd::first_moments({{tx.data(), n}, {ty.data(), n}, {tt.data(), n}}, {sn.data(), n},
                                         {cs.data(), n});
      const auto s = simd::central_moments({{tx.data(), n}, {ty.data(), n}, {tt.data(), n}}, 0.0, 0.0, 0.0);
      a.first.sum_x += f.sum_x;
      a.first.sum_y += f.sum_y;
      a.first.sum_sin += f.sum_sin;
      a.first.sum_cos += f.sum_cos;
      a.second.xx += s.xx;
      a.second.xy += s.xy;
      a.second.xt += s.xt;
      a.second.yy += s.yy;
      a.second.yt += s.yt;
      a.second.tt += s.tt;
    }
    done += n;
  }

  std::vector<GaussianPose2> out;
  out.reserve(objects.size());
  const double n = static_cast<double>(n_samples);
  const double unbias = n_samples > 1 ? n / (n - 1.0) : 1.0;
  for (const auto& a : acc) {
    // Offsets of the mean from the reference sample; the heading offset is a
    // circular mean of wrapped residuals.
    const double mx = a.first.sum_x / n;
    const double my = a.first.sum_y / n;
    const double mt = std::atan2(a.first.sum_sin, a.first.sum_cos);
    const double md = a.sum_theta / n;
    Eigen::Matrix3d cov;
    cov(0, 0) = a.second.xx / n - mx * mx;
    cov(0, 1) = a.second.xy / n - mx * my;
    cov(0, 2) = a.second.xt / n - mx * md;
    cov(1, 1) = a.second.yy / n - my * my;
    cov(1, 2) = a.second.yt / n - my * md;
    cov(2, 2) = a.second.tt / n - 2.0 * mt * md + mt * mt;
    cov(1, 0) = cov(0, 1);
    cov(2, 0) = cov(0, 2);
    cov(2, 1) = cov(1, 2);
    GaussianPose2 g;
    g.mean = {a.reference.x + mx, a.reference.y + my, geometry::normalize_angle(a.reference.theta + mt)};
    g.cov = cov * unbias;
    out.push_back(g);
  }
  return out;
}

GaussianPose2 monte_carlo_reference(const GaussianPose2& receiver, const GaussianPose2& sender,
                                    const GaussianPose2& object_in_sender, std::size_t n_samples,
                                    std::uint64_t seed) {
  return monte_carlo_reference_batch(receiver, sender, {&object_in_sender, 1}, n_samples, seed).front();
}

}  // namespace coopsense::sim
