#include "orbita/kernels.hpp"

#include <cassert>

namespace orbita::kernels::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

cplx dot(std::span<const double> w, std::span<const cplx> z) {
  assert(w.size() == z.size());
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    re += w[i] * z[i].real();
    im += w[i] * z[i].imag();
  }
  return {re, im};
}

cplx cdot(std::span<const cplx> a, std::span<const cplx> b) {
  assert(a.size() == b.size());
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double weighted_norm2(std::span<const double> w, std::span<const cplx> z) {
  assert(w.size() == z.size());
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    s += w[i] * (z[i].real() * z[i].real() + z[i].imag() * z[i].imag());
  }
  return s;
}

void cmul_inplace(std::span<cplx> z, std::span<const cplx> r) {
  assert(z.size() == r.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zr = z[i].real(), zi = z[i].imag();
    const double rr = r[i].real(), ri = r[i].imag();
    z[i] = {zr * rr - zi * ri, zr * ri + zi * rr};
  }
}

void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y) {
  assert(x.size() == y.size());
  const double ar = a.real(), ai = a.imag();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xr = x[i].real(), xi = x[i].imag();
    y[i] += cplx{ar * xr - ai * xi, ar * xi + ai * xr};
  }
}

}  // namespace orbita::kernels::scalar
