#pragma once

// Data-parallel kernels used by the Monte-Carlo oracle and the cost-map
// rasteriser. Every kernel has a scalar reference implementation; on x86-64 an
// AVX2 variant is compiled separately and selected at runtime.

#include <cstddef>
#include <span>
#include <string_view>

namespace coopsense::simd {

enum class Isa { scalar, avx2 };

/// Best instruction set supported by the CPU and compiled into this build.
Isa detected_isa();

/// Instruction set used by the dispatching entry points. Equals
/// detected_isa() unless COOPSENSE_SIMD=scalar is set in the environment.
Isa active_isa();

std::string_view isa_name(Isa isa);

/// Column views of a batch of frames: position, heading and its sin/cos.
struct FrameColumns {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> theta;
  std::span<const double> cos_theta;
  std::span<const double> sin_theta;
};

struct ConstPoseColumns {
  std::span<const double> x;
  std::span<const double> y;
  std::span<const double> theta;
};

struct PoseColumns {
  std::span<double> x;
  std::span<double> y;
  std::span<double> theta;
};

struct FirstMoments {
  double sum_x = 0.0;
  double sum_y = 0.0;
  double sum_sin = 0.0;
  double sum_cos = 0.0;
};

/// Sums of products of residuals about a reference pose; heading residuals are
/// wrapped to (-pi, pi].
struct SecondMoments {
  double xx = 0.0;
  double xy = 0.0;
  double xt = 0.0;
  double yy = 0.0;
  double yt = 0.0;
  double tt = 0.0;
};

/// Footprint of an inflated confidence ellipse on a grid. A point d away from
/// the centre is inside when d' * shape * d <= 1. Outside, the cost decays as
/// peak * exp(-0.5 (delta / sigma)^2) with delta the approximate metric distance
/// to the boundary, and vanishes beyond cutoff.
struct EllipseFootprint {
  double cx = 0.0;
  double cy = 0.0;
  double a = 1.0;  // shape(0,0)
  double b = 0.0;  // shape(0,1)
  double c = 1.0;  // shape(1,1)
  double inside_cost = 1.0;
  double falloff_peak = 0.5;
  double falloff_sigma = 1.0;
  double falloff_cutoff = 2.0;
};

// Dispatching entry points. Span lengths must agree; sizes are taken from the
// first argument.
void sincos(std::span<const double> angle, std::span<double> sin_out, std::span<double> cos_out);
void transform_batch(const FrameColumns& receiver, const FrameColumns& sender,
                     ConstPoseColumns object, PoseColumns out);
FirstMoments first_moments(ConstPoseColumns poses, std::span<const double> sin_theta,
                           std::span<const double> cos_theta);
SecondMoments central_moments(ConstPoseColumns poses, double mean_x, double mean_y, double mean_theta);
void ellipse_cost_row(double y, double x0, double dx, const EllipseFootprint& footprint,
                      std::span<double> costs);

namespace scalar {
void sincos(std::span<const double> angle, std::span<double> sin_out, std::span<double> cos_out);
void transform_batch(const FrameColumns& receiver, const FrameColumns& sender,
                     ConstPoseColumns object, PoseColumns out);
FirstMoments first_moments(ConstPoseColumns poses, std::span<const double> sin_theta,
                           std::span<const double> cos_theta);
SecondMoments central_moments(ConstPoseColumns poses, double mean_x, double mean_y, double mean_theta);
void ellipse_cost_row(double y, double x0, double dx, const EllipseFootprint& footprint,
                      std::span<double> costs);
}  // namespace scalar

#if defined(COOPSENSE_HAVE_AVX2)
namespace avx2 {
void sincos(std::span<const double> angle, std::span<double> sin_out, std::span<double> cos_out);
void transform_batch(const FrameColumns& receiver, const FrameColumns& sender,
                     ConstPoseColumns object, PoseColumns out);
FirstMoments first_moments(ConstPoseColumns poses, std::span<const double> sin_theta,
                           std::span<const double> cos_theta);
SecondMoments central_moments(ConstPoseColumns poses, double mean_x, double mean_y, double mean_theta);
void ellipse_cost_row(double y, double x0, double dx, const EllipseFootprint& footprint,
                      std::span<double> costs);
}  // namespace avx2
#endif

}  // namespace coopsense::simd
