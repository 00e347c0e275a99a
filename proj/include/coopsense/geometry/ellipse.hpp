#pragma once

#include <Eigen/Core>

namespace coopsense::geometry {

/// Level set of a 2D Gaussian containing `probability_mass` of its mass.
struct ConfidenceEllipse {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double orientation = 0.0;  // angle of the major axis, in (-pi/2, pi/2]
  double probability_mass = 0.95;

  double area() const;
};

/// Inverse CDF of the chi-square distribution with 2 degrees of freedom.
double chi_square_2dof_quantile(double probability);

/// Builds the confidence ellipse of a 2x2 position covariance. Throws
/// NumericDomainError when an eigenvalue is below -1e-9 and
/// std::invalid_argument for a mass outside (0, 1).
ConfidenceEllipse confidence_ellipse(const Eigen::Matrix2d& position_cov, const Eigen::Vector2d& center,
                                     double probability_mass = 0.95);

/// Smallest axis-aligned box containing the ellipse: (half-width, half-height).
Eigen::Vector2d bounding_half_extents(const ConfidenceEllipse& ellipse);

}  // namespace coopsense::geometry
