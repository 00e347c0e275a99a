#include "coopsense/geometry/ellipse.hpp"

#include "coopsense/geometry/pose.hpp"

#include <cmath>
#include <numbers>

namespace coopsense::geometry {

double ConfidenceEllipse::area() const { return std::numbers::pi * semi_major * semi_minor; }

double chi_square_2dof_quantile(double probability) {
  if (!(probability > 0.0 && probability < 1.0)) {
    throw std::invalid_argument("chi_square_2dof_quantile: probability must lie in (0, 1)");
  }
  // The 2-dof chi-square CDF is 1 - exp(-q / 2).
  return -2.0 * std::log1p(-probability);
}

ConfidenceEllipse confidence_ellipse(const Eigen::Matrix2d& position_cov, const Eigen::Vector2d& center,
                                     double probability_mass) {
  const double q = chi_square_2dof_quantile(probability_mass);
  if (!position_cov.allFinite()) throw NumericDomainError("confidence_ellipse: non-finite covariance");

  // Closed-form eigen-decomposition of the symmetric part.
  const double a = position_cov(0, 0);
  const double b = 0.5 * (position_cov(0, 1) + position_cov(1, 0));
  const double c = position_cov(1, 1);
  const double mid = 0.5 * (a + c);
  const double radius = std::hypot(0.5 * (a - c), b);
  const double major = mid + radius;
  const double minor = mid - radius;
  if (minor < -kPsdTolerance) {
    throw NumericDomainError("confidence_ellipse: covariance is not positive semi-definite");
  }

  ConfidenceEllipse e;
  e.center = center;
  e.probability_mass = probability_mass;
  e.semi_major = std::sqrt(q * std::max(major, 0.0));
  e.semi_minor = std::sqrt(q * std::max(minor, 0.0));
  e.orientation = (radius > 0.0) ? 0.5 * std::atan2(2.0 * b, a - c) : 0.0;
  if (e.orientation <= -std::numbers::pi / 2) e.orientation += std::numbers::pi;
  return e;
}

Eigen::Vector2d bounding_half_extents(const ConfidenceEllipse& e) {
  const double c = std::cos(e.orientation);
  const double s = std::sin(e.orientation);
  return {std::hypot(e.semi_major * c, e.semi_minor * s), std::hypot(e.semi_major * s, e.semi_minor * c)};
}

}  // namespace coopsense::geometry
