#pragma once

// Special functions that the standard library does not cover in the form we
// need: whole Bessel sequences (Miller backward recurrence), modified Bessel
// functions of complex argument with integer and half-integer order, the
// scaled real part of erf at complex argument, and the Jacobi theta_3 series.

#include <complex>
#include <vector>

namespace orbita::special {

using cplx = std::complex<double>;

/// e^{-x} I_n(x) for n = 0..nmax, x >= 0.
std::vector<double> bessel_i_scaled(double x, int nmax);

/// e^{-z} I_n(z) for n = 0..nmax, Re z >= 0.
std::vector<cplx> bessel_i_scaled(cplx z, int nmax);

/// e^{-z} I_{k-1/2}(z) for k = 0..kmax (orders -1/2, 1/2, 3/2, ...), Re z >= 0, z != 0.
std::vector<cplx> bessel_i_half_scaled(cplx z, int kmax);

/// J_n(x) for n = 0..nmax, x >= 0.
std::vector<double> bessel_j(double x, int nmax);

/// e^{-y^2} Re erf(x + iy) for x > 0 (A&S 7.1.29 with the Gaussian factor
/// folded into every term so large |y| does not overflow).
double scaled_re_erf(double x, double y);

/// theta_3(z | q) = sum_k q^{k^2} e^{2ikz} for real z, 0 <= q < 1.
double theta3(double z, double q);

/// Density of the wrapped normal distribution with mean mu and parameter
/// sigma. Uses image summation for sigma < 2 and the theta series above.
double wrapped_normal_pdf(double phi, double mu, double sigma);
double wrapped_normal_pdf_images(double phi, double mu, double sigma);
double wrapped_normal_pdf_series(double phi, double mu, double sigma);

/// sin(x)/x with the removable point handled.
double sinc(double x);

}  // namespace orbita::special
