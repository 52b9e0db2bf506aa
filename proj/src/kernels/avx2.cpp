// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma
// and must only be entered after avx2_available() returned true.

#include "orbita/kernels.hpp"

#include <immintrin.h>

#include <cassert>

namespace orbita::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// [re0, im0, re1, im1] -> re0 + re1, im0 + im1
inline cplx hsum_complex(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return {_mm_cvtsd_f64(s), _mm_cvtsd_f64(_mm_unpackhi_pd(s, s))};
}

inline const double* as_doubles(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(cplx* p) { return reinterpret_cast<double*>(p); }

}  // namespace

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  const double* pa = a.data();
  const double* pb = b.data();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += pa[i] * pb[i];
  return s;
}

cplx dot(std::span<const double> w, std::span<const cplx> z) {
  assert(w.size() == z.size());
  const std::size_t n = w.size();
  const double* pw = w.data();
  const double* pz = as_doubles(z.data());
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w4 = _mm256_loadu_pd(pw + i);
    const __m256d w01 = _mm256_permute4x64_pd(w4, 0x50);  // w0 w0 w1 w1
    const __m256d w23 = _mm256_permute4x64_pd(w4, 0xFA);  // w2 w2 w3 w3
    acc0 = _mm256_fmadd_pd(w01, _mm256_loadu_pd(pz + 2 * i), acc0);
    acc1 = _mm256_fmadd_pd(w23, _mm256_loadu_pd(pz + 2 * i + 4), acc1);
  }
  cplx s = hsum_complex(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += pw[i] * z[i];
  return s;
}

cplx cdot(std::span<const cplx> a, std::span<const cplx> b) {
  assert(a.size() == b.size());
  const std::size_t n = a.size();
  const double* pa = as_doubles(a.data());
  const double* pb = as_doubles(b.data());
  // re accumulates [ar*br, ai*bi], im accumulates [ar*bi, ai*br]
  __m256d re = _mm256_setzero_pd();
  __m256d im = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    re = _mm256_fmadd_pd(va, vb, re);
    im = _mm256_fmadd_pd(va, _mm256_permute_pd(vb, 0x5), im);
  }
  alignas(32) double r[4], m[4];
  _mm256_store_pd(r, re);
  _mm256_store_pd(m, im);
  double sr = (r[0] + r[2]) + (r[1] + r[3]);
  double si = (m[0] + m[2]) - (m[1] + m[3]);
  for (; i < n; ++i) {
    sr += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
    si += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
  }
  return {sr, si};
}

double weighted_norm2(std::span<const double> w, std::span<const cplx> z) {
  assert(w.size() == z.size());
  const std::size_t n = w.size();
  const double* pw = w.data();
  const double* pz = as_doubles(z.data());
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d w4 = _mm256_loadu_pd(pw + i);
    const __m256d w01 = _mm256_permute4x64_pd(w4, 0x50);
    const __m256d w23 = _mm256_permute4x64_pd(w4, 0xFA);
    const __m256d z01 = _mm256_loadu_pd(pz + 2 * i);
    const __m256d z23 = _mm256_loadu_pd(pz + 2 * i + 4);
    acc0 = _mm256_fmadd_pd(_mm256_mul_pd(w01, z01), z01, acc0);
    acc1 = _mm256_fmadd_pd(_mm256_mul_pd(w23, z23), z23, acc1);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += pw[i] * std::norm(z[i]);
  return s;
}

void cmul_inplace(std::span<cplx> z, std::span<const cplx> r) {
  assert(z.size() == r.size());
  const std::size_t n = z.size();
  double* pz = as_doubles(z.data());
  const double* pr = as_doubles(r.data());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vz = _mm256_loadu_pd(pz + 2 * i);
    const __m256d vr = _mm256_loadu_pd(pr + 2 * i);
    const __m256d rr = _mm256_movedup_pd(vr);          // rr rr
    const __m256d ri = _mm256_permute_pd(vr, 0xF);     // ri ri
    const __m256d zs = _mm256_permute_pd(vz, 0x5);     // zi zr
    const __m256d t = _mm256_mul_pd(zs, ri);           // zi*ri zr*ri
    _mm256_storeu_pd(pz + 2 * i, _mm256_fmaddsub_pd(vz, rr, t));
  }
  for (; i < n; ++i) z[i] *= r[i];
}

void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y) {
  assert(x.size() == y.size());
  const std::size_t n = x.size();
  const double* px = as_doubles(x.data());
  double* py = as_doubles(y.data());
  const __m256d ar = _mm256_set1_pd(a.real());
  const __m256d ai = _mm256_set1_pd(a.imag());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d t = _mm256_mul_pd(_mm256_permute_pd(vx, 0x5), ai);  // xi*ai xr*ai
    const __m256d prod = _mm256_fmaddsub_pd(vx, ar, t);
    _mm256_storeu_pd(py + 2 * i, _mm256_add_pd(_mm256_loadu_pd(py + 2 * i), prod));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

}  // namespace orbita::kernels::avx2
