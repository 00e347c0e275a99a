// AVX2 variants of the batch kernels. Compiled with -mavx2 -mfma; only called
// after a runtime CPU check.

#include "coopsense/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <numbers>

namespace coopsense::simd::avx2 {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline __m256d load(std::span<const double> s, std::size_t i) { return _mm256_loadu_pd(s.data() + i); }
inline __m256d set1(double v) { return _mm256_set1_pd(v); }

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double wrap(double t) { return t - kTwoPi * std::ceil((t - std::numbers::pi) / kTwoPi); }

// Same arithmetic as the scalar wrap, lane-wise.
inline __m256d wrap(__m256d t) {
  const __m256d k = _mm256_ceil_pd(_mm256_div_pd(_mm256_sub_pd(t, set1(std::numbers::pi)), set1(kTwoPi)));
  return _mm256_sub_pd(t, _mm256_mul_pd(set1(kTwoPi), k));
}

// Cephes-style sin/cos: reduction by multiples of pi/4 with a three-part
// Cody-Waite constant, then minimax polynomials on [-pi/4, pi/4].
// Accurate to a few ulp for |x| below ~1e5.
constexpr double kDp1 = 7.85398125648498535156e-1;
constexpr double kDp2 = 3.77489470793079817668e-8;
constexpr double kDp3 = 2.69515142907905952645e-15;
constexpr double kSinCoef[] = {1.58962301576546568060e-10, -2.50507477628578072866e-8,
                               2.75573136213857245213e-6,  -1.98412698295895385996e-4,
                               8.33333333332211858878e-3,  -1.66666666666666307295e-1};
constexpr double kCosCoef[] = {-1.13585365213876817300e-11, 2.08757008419747316778e-9,
                               -2.75573141792967388112e-7,  2.48015872888517045348e-5,
                               -1.38888888888730564116e-3,  4.16666666666665929218e-2};
constexpr double kLargeArgument = 1.0e5;

template <std::size_t N>
inline __m256d polevl(__m256d x, const double (&coef)[N]) {
  __m256d p = set1(coef[0]);
  for (std::size_t k = 1; k < N; ++k) p = _mm256_fmadd_pd(p, x, set1(coef[k]));
  return p;
}

inline void sincos4(__m256d x, __m256d& s, __m256d& c) {
  const __m256d sign_mask = set1(-0.0);
  const __m256d sign_x = _mm256_and_pd(x, sign_mask);
  const __m256d ax = _mm256_andnot_pd(sign_mask, x);

  __m256d octant = _mm256_floor_pd(_mm256_mul_pd(ax, set1(4.0 / std::numbers::pi)));
  const __m256d odd = _mm256_sub_pd(octant, _mm256_mul_pd(set1(2.0), _mm256_floor_pd(_mm256_mul_pd(octant, set1(0.5)))));
  octant = _mm256_add_pd(octant, odd);
  const __m256i j = _mm256_cvtepi32_epi64(_mm256_cvttpd_epi32(octant));

  __m256d z = _mm256_sub_pd(ax, _mm256_mul_pd(octant, set1(kDp1)));
  z = _mm256_sub_pd(z, _mm256_mul_pd(octant, set1(kDp2)));
  z = _mm256_sub_pd(z, _mm256_mul_pd(octant, set1(kDp3)));
  const __m256d zz = _mm256_mul_pd(z, z);

  const __m256d sin_poly = _mm256_fmadd_pd(_mm256_mul_pd(z, zz), polevl(zz, kSinCoef), z);
  const __m256d cos_poly = _mm256_add_pd(_mm256_fnmadd_pd(set1(0.5), zz, set1(1.0)),
                                         _mm256_mul_pd(_mm256_mul_pd(zz, zz), polevl(zz, kCosCoef)));

  const __m256i two = _mm256_set1_epi64x(2);
  const __m256i four = _mm256_set1_epi64x(4);
  const __m256d use_sin_poly =
      _mm256_castsi256_pd(_mm256_cmpeq_epi64(_mm256_and_si256(j, two), _mm256_setzero_si256()));
  __m256d sin_r = _mm256_blendv_pd(cos_poly, sin_poly, use_sin_poly);
  __m256d cos_r = _mm256_blendv_pd(sin_poly, cos_poly, use_sin_poly);

  const __m256i sin_flip = _mm256_slli_epi64(_mm256_and_si256(j, four), 61);
  const __m256i cos_flip = _mm256_slli_epi64(_mm256_andnot_si256(_mm256_sub_epi64(j, two), four), 61);
  sin_r = _mm256_xor_pd(sin_r, _mm256_xor_pd(_mm256_castsi256_pd(sin_flip), sign_x));
  cos_r = _mm256_xor_pd(cos_r, _mm256_castsi256_pd(cos_flip));
  s = sin_r;
  c = cos_r;
}

// Cephes exp; inputs are clamped to [-700, 700].
constexpr double kExpP[] = {1.26177193074810590878e-4, 3.02994407707441961300e-2, 9.99999999999999999910e-1};
constexpr double kExpQ[] = {3.00198505138664455042e-6, 2.52448340349684104192e-3, 2.27265548208155028766e-1,
                            2.00000000000000000009e0};

inline __m256d exp4(__m256d x) {
  x = _mm256_max_pd(_mm256_min_pd(x, set1(700.0)), set1(-700.0));
  const __m256d fx = _mm256_floor_pd(_mm256_fmadd_pd(x, set1(std::numbers::log2e), set1(0.5)));
  __m256d r = _mm256_fnmadd_pd(fx, set1(6.93145751953125e-1), x);
  r = _mm256_fnmadd_pd(fx, set1(1.42860682030941723212e-6), r);
  const __m256d rr = _mm256_mul_pd(r, r);
  const __m256d px = _mm256_mul_pd(r, polevl(rr, kExpP));
  const __m256d qx = polevl(rr, kExpQ);
  const __m256d e = _mm256_fmadd_pd(set1(2.0), _mm256_div_pd(px, _mm256_sub_pd(qx, px)), set1(1.0));
  const __m256i n = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(fx));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(n, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(bits));
}

}  // namespace

void sincos(std::span<const double> angle, std::span<double> sin_out, std::span<double> cos_out) {
  const std::size_t n = angle.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = load(angle, i);
    const __m256d ax = _mm256_andnot_pd(set1(-0.0), x);
    if (_mm256_movemask_pd(_mm256_cmp_pd(ax, set1(kLargeArgument), _CMP_NLT_UQ)) != 0) {
      scalar::sincos(angle.subspan(i, 4), sin_out.subspan(i, 4), cos_out.subspan(i, 4));
      continue;
    }
    __m256d s, c;
    sincos4(x, s, c);
    _mm256_storeu_pd(sin_out.data() + i, s);
    _mm256_storeu_pd(cos_out.data() + i, c);
  }
  if (i < n) scalar::sincos(angle.subspan(i), sin_out.subspan(i), cos_out.subspan(i));
}

void transform_batch(const FrameColumns& receiver, const FrameColumns& sender,
                     ConstPoseColumns object, PoseColumns out) {
  const std::size_t n = object.x.size();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d cs = load(sender.cos_theta, i);
    const __m256d ss = load(sender.sin_theta, i);
    const __m256d ox = load(object.x, i);
    const __m256d oy = load(object.y, i);
    const __m256d gx = _mm256_add_pd(load(sender.x, i), _mm256_sub_pd(_mm256_mul_pd(cs, ox), _mm256_mul_pd(ss, oy)));
    const __m256d gy = _mm256_add_pd(load(sender.y, i), _mm256_add_pd(_mm256_mul_pd(ss, ox), _mm256_mul_pd(cs, oy)));
    const __m256d dx = _mm256_sub_pd(gx, load(receiver.x, i));
    const __m256d dy = _mm256_sub_pd(gy, load(receiver.y, i));
    const __m256d cr = load(receiver.cos_theta, i);
    const __m256d sr = load(receiver.sin_theta, i);
    _mm256_storeu_pd(out.x.data() + i, _mm256_add_pd(_mm256_mul_pd(cr, dx), _mm256_mul_pd(sr, dy)));
    _mm256_storeu_pd(out.y.data() + i, _mm256_sub_pd(_mm256_mul_pd(cr, dy), _mm256_mul_pd(sr, dx)));
    const __m256d heading =
        _mm256_sub_pd(_mm256_add_pd(load(object.theta, i), load(sender.theta, i)), load(receiver.theta, i));
    _mm256_storeu_pd(out.theta.data() + i, wrap(heading));
  }
  if (i < n) {
    auto tail = [i](std::span<const double> s) { return s.subspan(i); };
    const FrameColumns r{tail(receiver.x), tail(receiver.y), tail(receiver.theta), tail(receiver.cos_theta),
                         tail(receiver.sin_theta)};
    const FrameColumns s{tail(sender.x), tail(sender.y), tail(sender.theta), tail(sender.cos_theta),
                         tail(sender.sin_theta)};
    scalar::transform_batch(r, s, {tail(object.x), tail(object.y), tail(object.theta)},
                            {out.x.subspan(i), out.y.subspan(i), out.theta.subspan(i)});
  }
}

FirstMoments first_moments(ConstPoseColumns poses, std::span<const double> sin_theta,
                           std::span<const double> cos_theta) {
  const std::size_t n = poses.x.size();
  __m256d sx = _mm256_setzero_pd(), sy = _mm256_setzero_pd();
  __m256d ss = _mm256_setzero_pd(), sc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    sx = _mm256_add_pd(sx, load(poses.x, i));
    sy = _mm256_add_pd(sy, load(poses.y, i));
    ss = _mm256_add_pd(ss, load(sin_theta, i));
    sc = _mm256_add_pd(sc, load(cos_theta, i));
  }
  FirstMoments m{hsum(sx), hsum(sy), hsum(ss), hsum(sc)};
  for (; i < n; ++i) {
    m.sum_x += poses.x[i];
    m.sum_y += poses.y[i];
    m.sum_sin += sin_theta[i];
    m.sum_cos += cos_theta[i];
  }
  return m;
}

SecondMoments central_moments(ConstPoseColumns poses, double mean_x, double mean_y, double mean_theta) {
  const std::size_t n = poses.x.size();
  const __m256d mx = set1(mean_x), my = set1(mean_y), mt = set1(mean_theta);
  __m256d xx = _mm256_setzero_pd(), xy = _mm256_setzero_pd(), xt = _mm256_setzero_pd();
  __m256d yy = _mm256_setzero_pd(), yt = _mm256_setzero_pd(), tt = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(load(poses.x, i), mx);
    const __m256d dy = _mm256_sub_pd(load(poses.y, i), my);
    const __m256d dt = wrap(_mm256_sub_pd(load(poses.theta, i), mt));
    xx = _mm256_fmadd_pd(dx, dx, xx);
    xy = _mm256_fmadd_pd(dx, dy, xy);
    xt = _mm256_fmadd_pd(dx, dt, xt);
    yy = _mm256_fmadd_pd(dy, dy, yy);
    yt = _mm256_fmadd_pd(dy, dt, yt);
    tt = _mm256_fmadd_pd(dt, dt, tt);
  }
  SecondMoments m{hsum(xx), hsum(xy), hsum(xt), hsum(yy), hsum(yt), hsum(tt)};
  for (; i < n; ++i) {
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

void ellipse_cost_row(double y, double x0, double dx, const EllipseFootprint& f, std::span<double> costs) {
  const std::size_t n = costs.size();
  const __m256d ry = set1(y - f.cy);
  const __m256d cyy = _mm256_mul_pd(set1(f.c), _mm256_mul_pd(ry, ry));
  const __m256d two_b_ry = _mm256_mul_pd(set1(2.0 * f.b), ry);
  const __m256d ry2 = _mm256_mul_pd(ry, ry);
  const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d one = set1(1.0);
  const __m256d inv_sigma = set1(1.0 / f.falloff_sigma);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d idx = _mm256_add_pd(set1(static_cast<double>(i)), lane);
    const __m256d rx = _mm256_sub_pd(_mm256_fmadd_pd(set1(dx), idx, set1(x0)), set1(f.cx));
    const __m256d q = _mm256_add_pd(_mm256_mul_pd(rx, _mm256_fmadd_pd(set1(f.a), rx, two_b_ry)), cyy);
    const __m256d inside = _mm256_cmp_pd(q, one, _CMP_LE_OQ);
    const __m256d radius = _mm256_sqrt_pd(_mm256_fmadd_pd(rx, rx, ry2));
    const __m256d delta = _mm256_mul_pd(radius, _mm256_sub_pd(one, _mm256_div_pd(one, _mm256_sqrt_pd(q))));
    const __m256d u = _mm256_mul_pd(delta, inv_sigma);
    const __m256d falloff = _mm256_mul_pd(set1(f.falloff_peak), exp4(_mm256_mul_pd(set1(-0.5), _mm256_mul_pd(u, u))));
    const __m256d near = _mm256_cmp_pd(delta, set1(f.falloff_cutoff), _CMP_LE_OQ);
    __m256d cost = _mm256_and_pd(falloff, near);
    cost = _mm256_blendv_pd(cost, set1(f.inside_cost), inside);
    const __m256d current = _mm256_loadu_pd(costs.data() + i);
    _mm256_storeu_pd(costs.data() + i, _mm256_max_pd(cost, current));
  }
  if (i < n) {
    scalar::ellipse_cost_row(y, x0 + dx * static_cast<double>(i), dx, f, costs.subspan(i));
  }
}

}  // namespace coopsense::simd::avx2
