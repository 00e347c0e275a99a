#include "coopsense/geometry/unscented.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>

namespace coopsense::geometry {

namespace {

// Lower-triangular L with A = L L^T for symmetric positive semi-definite A.
// Zero pivots are accepted when the rest of their column vanishes too, which
// covers exact (zero-variance) blocks of the augmented covariance.
std::optional<AugmentedMatrix> semidefinite_cholesky(const AugmentedMatrix& a) {
  const double scale = std::max(1.0, a.diagonal().cwiseAbs().maxCoeff());
  const double tol = 1e-14 * scale;
  AugmentedMatrix l = AugmentedMatrix::Zero();
  for (int j = 0; j < kAugmentedDim; ++j) {
    double pivot = a(j, j);
    for (int k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (pivot > tol) {
      const double root = std::sqrt(pivot);
      l(j, j) = root;
      for (int i = j + 1; i < kAugmentedDim; ++i) {
        double v = a(i, j);
        for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
        l(i, j) = v / root;
      }
    } else if (pivot >= -tol) {
      for (int i = j + 1; i < kAugmentedDim; ++i) {
        double v = a(i, j);
        for (int k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
        if (std::abs(v) > std::sqrt(tol)) return std::nullopt;
      }
    } else {
      return std::nullopt;
    }
  }
  return l;
}

}  // namespace

SigmaPointSet sigma_points(const AugmentedVector& mean, const AugmentedMatrix& cov, const UtParams& params) {
  if (!(params.alpha > 0.0 && params.alpha <= 1.0)) {
    throw std::invalid_argument("sigma_points: alpha must lie in (0, 1]");
  }
  if (!(params.kappa >= 0.0)) throw std::invalid_argument("sigma_points: kappa must be non-negative");
  if (!mean.allFinite() || !cov.allFinite()) throw std::invalid_argument("sigma_points: non-finite input");

  constexpr int d = kAugmentedDim;
  const double lambda = params.lambda(d);
  const double spread = d + lambda;

  const AugmentedMatrix symmetric = 0.5 * (cov + cov.transpose());
  auto root = semidefinite_cholesky(spread * symmetric);
  if (!root) {
    root = semidefinite_cholesky(spread * (symmetric + kCholeskyJitter * AugmentedMatrix::Identity()));
    if (!root) throw NumericDomainError("sigma_points: covariance is not positive semi-definite");
  }

  SigmaPointSet set;
  set.params = params;
  set.points.reserve(2 * d + 1);
  set.points.push_back(mean);
  for (int i = 0; i < d; ++i) set.points.push_back(mean + root->col(i));
  for (int i = 0; i < d; ++i) set.points.push_back(mean - root->col(i));

  const double w0 = lambda / spread;
  const double wi = 1.0 / (2.0 * spread);
  set.mean_weights.assign(2 * d + 1, wi);
  set.cov_weights.assign(2 * d + 1, wi);
  set.mean_weights[0] = w0;
  set.cov_weights[0] = w0 + (1.0 - params.alpha * params.alpha + params.beta);
  return set;
}

GaussianPose2 transform_with_uncertainty(const GaussianPose2& receiver, const GaussianPose2& sender,
                                         const GaussianPose2& object_in_sender, const UtParams& params) {
  validate(receiver, "receiver");
  validate(sender, "sender");
  validate(object_in_sender, "object");

  AugmentedVector mean;
  mean << receiver.mean.vector(), sender.mean.vector(), object_in_sender.mean.vector();
  AugmentedMatrix cov = AugmentedMatrix::Zero();
  cov.block<3, 3>(0, 0) = receiver.cov;
  cov.block<3, 3>(3, 3) = sender.cov;
  cov.block<3, 3>(6, 6) = object_in_sender.cov;

  const SigmaPointSet set = sigma_points(mean, cov, params);
  const std::size_t n = set.points.size();

  std::vector<Pose2> transformed;
  transformed.reserve(n);
  for (const auto& p : set.points) {
    // Sigma headings are not re-wrapped: trans() is 2*pi periodic in them.
    transformed.push_back(trans({p(0), p(1), p(2)}, {p(3), p(4), p(5)}, {p(6), p(7), p(8)}));
  }

  // Mean as offsets from the central point so that a degenerate spread
  // reproduces trans() exactly.
  const Pose2& centre = transformed.front();
  double dx = 0.0, dy = 0.0, sin_sum = 0.0, cos_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = set.mean_weights[i];
    dx += w * (transformed[i].x - centre.x);
    dy += w * (transformed[i].y - centre.y);
    const double dt = normalize_angle(transformed[i].theta - centre.theta);
    sin_sum += w * std::sin(dt);
    cos_sum += w * std::cos(dt);
  }
  GaussianPose2 out;
  out.mean = {centre.x + dx, centre.y + dy, normalize_angle(centre.theta + std::atan2(sin_sum, cos_sum))};

  out.cov.setZero();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d r(transformed[i].x - out.mean.x, transformed[i].y - out.mean.y,
                            normalize_angle(transformed[i].theta - out.mean.theta));
    out.cov += set.cov_weights[i] * r * r.transpose();
  }
  out.cov = (0.5 * (out.cov + out.cov.transpose())).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(out.cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kPsdTolerance) {
    throw NumericDomainError("transform_with_uncertainty: recovered covariance is not positive semi-definite");
  }
  return out;
}

}  // namespace coopsense::geometry
