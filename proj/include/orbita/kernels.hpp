#pragma once

// Data-parallel inner loops shared by the transforms, moment sums and
// Hankel quadratures. Each kernel has a scalar reference implementation and,
// on x86-64, an AVX2/FMA variant. The public entry points dispatch once at
// first use based on CPUID; ORBITA_SIMD=scalar forces the reference path.

#include <complex>
#include <span>
#include <string_view>

namespace orbita::kernels {

using cplx = std::complex<double>;

enum class Backend { scalar, avx2 };

std::string_view to_string(Backend b) noexcept;

/// True when the binary carries AVX2 kernels and the CPU supports AVX2+FMA.
bool avx2_available() noexcept;

/// Backend selected for the dispatching entry points below.
Backend active_backend() noexcept;

// sum_i a_i b_i
double dot(std::span<const double> a, std::span<const double> b);
// sum_i w_i z_i
cplx dot(std::span<const double> w, std::span<const cplx> z);
// sum_i conj(a_i) b_i
cplx cdot(std::span<const cplx> a, std::span<const cplx> b);
// sum_i w_i |z_i|^2
double weighted_norm2(std::span<const double> w, std::span<const cplx> z);
// z_i *= r_i
void cmul_inplace(std::span<cplx> z, std::span<const cplx> r);
// y_i += a x_i
void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y);

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
cplx dot(std::span<const double> w, std::span<const cplx> z);
cplx cdot(std::span<const cplx> a, std::span<const cplx> b);
double weighted_norm2(std::span<const double> w, std::span<const cplx> z);
void cmul_inplace(std::span<cplx> z, std::span<const cplx> r);
void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y);
}  // namespace scalar

#if defined(ORBITA_HAVE_AVX2)
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
cplx dot(std::span<const double> w, std::span<const cplx> z);
cplx cdot(std::span<const cplx> a, std::span<const cplx> b);
double weighted_norm2(std::span<const double> w, std::span<const cplx> z);
void cmul_inplace(std::span<cplx> z, std::span<const cplx> r);
void caxpy(cplx a, std::span<const cplx> x, std::span<cplx> y);
}  // namespace avx2
#endif

}  // namespace orbita::kernels
