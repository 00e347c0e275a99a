#include "coopsense/simd/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace coopsense::simd {

namespace {

struct KernelTable {
  void (*sincos)(std::span<const double>, std::span<double>, std::span<double>);
  void (*transform_batch)(const FrameColumns&, const FrameColumns&, ConstPoseColumns, PoseColumns);
  FirstMoments (*first_moments)(ConstPoseColumns, std::span<const double>, std::span<const double>);
  SecondMoments (*central_moments)(ConstPoseColumns, double, double, double);
  void (*ellipse_cost_row)(double, double, double, const EllipseFootprint&, std::span<double>);
};

constexpr KernelTable kScalarTable{scalar::sincos, scalar::transform_batch, scalar::first_moments,
                                   scalar::central_moments, scalar::ellipse_cost_row};
#if defined(COOPSENSE_HAVE_AVX2)
constexpr KernelTable kAvx2Table{avx2::sincos, avx2::transform_batch, avx2::first_moments,
                                 avx2::central_moments, avx2::ellipse_cost_row};
#endif

Isa probe() {
#if defined(COOPSENSE_HAVE_AVX2)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

Isa choose() {
  const char* env = std::getenv("COOPSENSE_SIMD");
  if (env != nullptr && std::string_view(env) == "scalar") return Isa::scalar;
  return detected_isa();
}

const KernelTable& table() {
  static const KernelTable* selected = [] {
#if defined(COOPSENSE_HAVE_AVX2)
    if (active_isa() == Isa::avx2) return &kAvx2Table;
#endif
    return &kScalarTable;
  }();
  return *selected;
}

}  // namespace

Isa detected_isa() {
  static const Isa isa = probe();
  return isa;
}

Isa active_isa() {
  static const Isa isa = choose();
  return isa;
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::avx2:
      return "avx2";
    case Isa::scalar:
      break;
  }
  return "scalar";
}

void sincos(std::span<const double> angle, std::span<double> sin_out, std::span<double> cos_out) {
  table().sincos(angle, sin_out, cos_out);
}

void transform_batch(const FrameColumns& receiver, const FrameColumns& sender, ConstPoseColumns object,
                     PoseColumns out) {
  table().transform_batch(receiver, sender, object, out);
}

FirstMoments first_moments(ConstPoseColumns poses, std::span<const double> sin_theta,
                           std::span<const double> cos_theta) {
  return table().first_moments(poses, sin_theta, cos_theta);
}

SecondMoments central_moments(ConstPoseColumns poses, double mean_x, double mean_y, double mean_theta) {
  return table().central_moments(poses, mean_x, mean_y, mean_theta);
}

void ellipse_cost_row(double y, double x0, double dx, const EllipseFootprint& footprint, std::span<double> costs) {
  table().ellipse_cost_row(y, x0, dx, footprint, costs);
}

}  // namespace coopsense::simd
