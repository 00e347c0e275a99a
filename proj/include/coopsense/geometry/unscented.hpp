#pragma once

#include "coopsense/geometry/pose.hpp"

#include <Eigen/Core>

#include <vector>

namespace coopsense::geometry {

/// Augmented state: receiver pose, sender pose, object pose (3 each).
inline constexpr int kAugmentedDim = 9;
using AugmentedVector = Eigen::Matrix<double, kAugmentedDim, 1>;
using AugmentedMatrix = Eigen::Matrix<double, kAugmentedDim, kAugmentedDim>;

/// Scaling parameters of the unscented transform.
/// alpha in (0, 1], kappa >= 0; beta = 2 suits Gaussian priors.
struct UtParams {
  double alpha = 0.9;
  double beta = 2.0;
  double kappa = 0.0;

  double lambda(int dim) const { return alpha * alpha * (dim + kappa) - dim; }
};

struct SigmaPointSet {
  std::vector<AugmentedVector> points;  // 2d + 1 points, point 0 is the mean
  std::vector<double> mean_weights;
  std::vector<double> cov_weights;
  UtParams params;
};

/// Diagonal jitter added once when the Cholesky factorisation fails.
inline constexpr double kCholeskyJitter = 1e-12;

/// Generates the 2d+1 sigma points of N(mean, cov). The matrix square root is
/// the lower Cholesky factor of (d + lambda) * cov; zero pivots are accepted
/// when their column vanishes, so exact (zero-variance) blocks are fine.
/// Throws NumericDomainError when cov is not PSD even after one retry with kCholeskyJitter on the diagonal, std::invalid_argument for
/// parameters outside their domain.
SigmaPointSet sigma_points(const AugmentedVector& mean, const AugmentedMatrix& cov, const UtParams& params = {});

/// Transforms an object pose observed by `sender` into the frame of `receiver`
/// and propagates the uncertainty of all three poses with the unscented
/// transform. Heading statistics use a circular mean and wrapped residuals.
GaussianPose2 transform_with_uncertainty(const GaussianPose2& receiver, const GaussianPose2& sender,
                                         const GaussianPose2& object_in_sender, const UtParams& params = {});

}  // namespace coopsense::geometry
