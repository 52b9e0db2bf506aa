#pragma once

#include <complex>
#include <functional>
#include <vector>

namespace orbita::quad {

using cplx = std::complex<double>;

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

/// Composite 30-point Gauss-Legendre rule on [a, b] split into equal panels.
Rule gauss_legendre(double a, double b, int panels);

/// Concatenate rules (disjoint intervals).
Rule join(const Rule& a, const Rule& b);

/// Fourier integrals c_m = (1/sqrt(2 pi)) sum_j w_j f_j e^{i m x_j} for
/// m = -M..M, index m + M. Phases advance by a rotation recurrence that is
/// re-seeded from an exact exponential every 128 steps.
std::vector<cplx> fourier_integrals(const Rule& rule, const std::vector<cplx>& f, int M);

}  // namespace orbita::quad
