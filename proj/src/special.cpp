#include "orbita/special.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace orbita::special {

namespace {

constexpr double kRescaleAt = 1e200;
constexpr double kRescaleBy = 1e-200;

// Starting order for Miller's backward recurrence. The sequence has to be
// past both the requested order and the turning point |z| by a margin that
// covers the transition zone (width ~ |z|^{1/3}).
int miller_start(double absz, int nmax) {
  const double base = std::max(static_cast<double>(nmax), std::ceil(absz));
  return static_cast<int>(base + 50.0 + std::ceil(10.0 * std::cbrt(absz)));
}

// 1 - e^{-2z} without cancellation near z = 0.
cplx one_minus_exp_m2z(cplx z) {
  const cplx t = 2.0 * z;
  if (std::abs(t) > 0.1) return 1.0 - std::exp(-t);
  cplx term = t, sum = t;
  for (int k = 2; k < 20; ++k) {
    term *= -t / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

template <class T>
std::vector<T> miller_i(T z, int nmax, double order_offset, int& nstart) {
  nstart = miller_start(std::abs(z), nmax);
  std::vector<T> f(static_cast<std::size_t>(nstart) + 2, T(0));
  f[nstart] = T(1e-30);
  const T two_over_z = T(2.0) / z;
  for (int k = nstart; k >= 1; --k) {
    const double nu = k + order_offset;
    f[k - 1] = f[k + 1] + (nu * two_over_z) * f[k];
    if (std::abs(f[k - 1]) > kRescaleAt) {
      for (int j = k - 1; j <= nstart; ++j) f[j] *= kRescaleBy;
    }
  }
  return f;
}

}  // namespace

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

std::vector<double> bessel_i_scaled(double x, int nmax) {
  if (x < 0.0 || nmax < 0) throw std::invalid_argument("bessel_i_scaled: need x >= 0, nmax >= 0");
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  int nstart = 0;
  auto f = miller_i<double>(x, nmax, 0.0, nstart);
  // e^{-x} (I_0 + 2 sum I_k) = 1
  double s = f[0];
  for (int k = 1; k <= nstart; ++k) s += 2.0 * f[k];
  for (int k = 0; k <= nmax; ++k) out[k] = f[k] / s;
  return out;
}

std::vector<cplx> bessel_i_scaled(cplx z, int nmax) {
  if (z.real() < 0.0 || nmax < 0) throw std::invalid_argument("bessel_i_scaled: need Re z >= 0");
  std::vector<cplx> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  if (z == cplx(0.0)) {
    out[0] = 1.0;
    return out;
  }
  int nstart = 0;
  auto f = miller_i<cplx>(z, nmax, 0.0, nstart);
  cplx s = f[0];
  for (int k = 1; k <= nstart; ++k) s += 2.0 * f[k];
  for (int k = 0; k <= nmax; ++k) out[k] = f[k] / s;
  return out;
}

std::vector<cplx> bessel_i_half_scaled(cplx z, int kmax) {
  if (z.real() < 0.0 || z == cplx(0.0) || kmax < 0) {
    throw std::invalid_argument("bessel_i_half_scaled: need Re z >= 0, z != 0");
  }
  int nstart = 0;
  // index k holds order k - 1/2
  auto f = miller_i<cplx>(z, std::max(kmax, 1), -0.5, nstart);
  // the raw recurrence values can be ~1e200; squaring them would overflow
  const double big = std::max(std::abs(f[0]), std::abs(f[1]));
  for (auto& v : f) v /= big;
  const cplx root = std::sqrt(2.0 * std::numbers::pi * z);
  const cplx e_minus = one_minus_exp_m2z(z) / root;      // e^{-z} I_{1/2}
  const cplx e_plus = (2.0 - one_minus_exp_m2z(z)) / root;  // e^{-z} I_{-1/2}
  const cplx num = std::conj(f[0]) * e_plus + std::conj(f[1]) * e_minus;
  const double den = std::norm(f[0]) + std::norm(f[1]);
  const cplx scale = num / den;
  std::vector<cplx> out(static_cast<std::size_t>(kmax) + 1);
  for (int k = 0; k <= kmax; ++k) out[k] = scale * f[k];
  return out;
}

std::vector<double> bessel_j(double x, int nmax) {
  if (x < 0.0 || nmax < 0) throw std::invalid_argument("bessel_j: need x >= 0, nmax >= 0");
  std::vector<double> out(static_cast<std::size_t>(nmax) + 1, 0.0);
  if (x == 0.0) {
    out[0] = 1.0;
    return out;
  }
  if (x > nmax + 1.0) {
    // upward recurrence is stable while n < x
    out[0] = ::j0(x);
    if (nmax > 0) out[1] = ::j1(x);
    for (int k = 1; k < nmax; ++k) out[k + 1] = 2.0 * k / x * out[k] - out[k - 1];
    return out;
  }
  int nstart = miller_start(x, nmax);
  nstart += nstart % 2;
  std::vector<double> f(static_cast<std::size_t>(nstart) + 2, 0.0);
  f[nstart] = 1e-30;
  const double two_over_x = 2.0 / x;
  for (int k = nstart; k >= 1; --k) {
    f[k - 1] = k * two_over_x * f[k] - f[k + 1];
    if (std::abs(f[k - 1]) > kRescaleAt) {
      for (int j = k - 1; j <= nstart; ++j) f[j] *= kRescaleBy;
    }
  }
  // J_0 + 2 sum J_{2k} = 1
  double s = f[0];
  for (int k = 2; k <= nstart; k += 2) s += 2.0 * f[k];
  for (int k = 0; k <= nmax; ++k) out[k] = f[k] / s;
  return out;
}

double scaled_re_erf(double x, double y) {
  if (!(x > 0.0)) throw std::invalid_argument("scaled_re_erf: need x > 0");
  y = std::abs(y);
  const double pi = std::numbers::pi;
  const double ey2 = std::exp(-y * y);
  const double ex2 = std::exp(-x * x);
  const double sxy = std::sin(x * y);
  double s = ey2 * std::erf(x) + ex2 * ey2 * 2.0 * sxy * sxy / (2.0 * pi * x);

  const double c2 = std::cos(2.0 * x * y);
  const double s2 = std::sin(2.0 * x * y);
  const int nmax = static_cast<int>(std::ceil(2.0 * y + 40.0));
  double sum = 0.0;
  for (int n = 1; n <= nmax; ++n) {
    const double hn = 0.5 * n;
    const double em = std::exp(-(hn - y) * (hn - y));
    const double ep = std::exp(-(hn + y) * (hn + y));
    const double lead = 2.0 * x * std::exp(-hn * hn - y * y);
    const double term = lead - x * c2 * (em + ep) + hn * s2 * (em - ep);
    sum += term / (n * n + 4.0 * x * x);
  }
  s += (2.0 / pi) * ex2 * sum;
  return s;
}

double theta3(double z, double q) {
  if (q < 0.0 || q >= 1.0) throw std::invalid_argument("theta3: need 0 <= q < 1");
  double s = 1.0;
  if (q == 0.0) return s;
  const double lq = std::log(q);
  for (int k = 1;; ++k) {
    const double w = std::exp(lq * k * k);
    if (w < 1e-17) break;
    s += 2.0 * w * std::cos(2.0 * k * z);
  }
  return s;
}

double wrapped_normal_pdf_series(double phi, double mu, double sigma) {
  const double q = std::exp(-0.5 * sigma * sigma);
  return theta3(0.5 * (phi - mu), q) / (2.0 * std::numbers::pi);
}

double wrapped_normal_pdf_images(double phi, double mu, double sigma) {
  const double two_pi = 2.0 * std::numbers::pi;
  double d = std::remainder(phi - mu, two_pi);
  const int jmax = static_cast<int>(std::ceil(9.0 * sigma / two_pi)) + 1;
  double s = 0.0;
  for (int j = -jmax; j <= jmax; ++j) {
    const double t = (d + two_pi * j) / sigma;
    s += std::exp(-0.5 * t * t);
  }
  return s / (sigma * std::sqrt(two_pi));
}

double wrapped_normal_pdf(double phi, double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("wrapped_normal_pdf: need sigma > 0");
  // the theta series cancels to negative round-off in the tails of narrow
  // distributions; images are exact and nonnegative there
  return sigma < 2.0 ? wrapped_normal_pdf_images(phi, mu, sigma) : wrapped_normal_pdf_series(phi, mu, sigma);
}

}  // namespace orbita::special
