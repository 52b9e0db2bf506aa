#include "orbita/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "orbita/kernels.hpp"

namespace orbita::quad {

Rule gauss_legendre(double a, double b, int panels) {
  if (!(b > a) || panels < 1) throw std::invalid_argument("gauss_legendre: need b > a, panels >= 1");
  using GL = boost::math::quadrature::gauss<double, 30>;
  const auto& xs = GL::abscissa();  // nonnegative half, 15 entries
  const auto& ws = GL::weights();
  Rule r;
  r.x.reserve(static_cast<std::size_t>(panels) * 30);
  r.w.reserve(static_cast<std::size_t>(panels) * 30);
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      r.x.push_back(mid - half * xs[i]);
      r.w.push_back(half * ws[i]);
      r.x.push_back(mid + half * xs[i]);
      r.w.push_back(half * ws[i]);
    }
  }
  return r;
}

Rule join(const Rule& a, const Rule& b) {
  Rule r = a;
  r.x.insert(r.x.end(), b.x.begin(), b.x.end());
  r.w.insert(r.w.end(), b.w.begin(), b.w.end());
  return r;
}

std::vector<cplx> fourier_integrals(const Rule& rule, const std::vector<cplx>& f, int M) {
  const std::size_t n = rule.x.size();
  if (f.size() != n) throw std::invalid_argument("fourier_integrals: size mismatch");
  std::vector<cplx> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = rule.w[j] * f[j];

  std::vector<cplx> out(2 * static_cast<std::size_t>(M) + 1);
  std::vector<cplx> step(n), phase(n);
  const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  // sign = +1 fills m >= 0, sign = -1 fills m <= 0
  for (int sign : {+1, -1}) {
    // cdot conjugates its first argument, so carry e^{-i sign m x}
    for (std::size_t j = 0; j < n; ++j) step[j] = std::polar(1.0, -sign * rule.x[j]);
    for (int m = 0; m <= M; ++m) {
      if (m % 128 == 0) {
        for (std::size_t j = 0; j < n; ++j) phase[j] = std::polar(1.0, -sign * m * rule.x[j]);
      }
      out[static_cast<std::size_t>(M + sign * m)] = norm * kernels::cdot(phase, g);
      kernels::cmul_inplace(phase, step);
    }
  }
  return out;
}

}  // namespace orbita::quad
