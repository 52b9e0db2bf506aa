#pragma once

// Simulated OAM-spectrum measurement: amplitude mask on a Gaussian beam,
// Fresnel propagation to the spiral phase analyzer, lens Fourier transform and
// power detection behind a circular aperture.
//
// Mask modes carry e^{i m phi}. With u0 chosen so the input beam has unit
// power, every propagated mode u_m has unit power over the whole plane and the
// detected powers are fractions of the input. Vortex modes keep a ring tail
// that decays like 1/r^2, so the finite radial grid holds about 1 - O(m^2/rMax^2).

#include <complex>
#include <cstdint>
#include <vector>

#include "orbita/core.hpp"
#include "orbita/quadrature.hpp"

namespace orbita::optics {

struct OpticalConfig {
  double wavelength = 532e-9;  // m
  double waist = 1e-3;         // w0 at the mask plane, m
  double distance = 0.5;       // mask to analyzer, m
  double focal = 0.3;          // lens focal length, m
  double aperture = 35e-6;     // detector aperture radius R, m; near the {0, +-1, +-2} optimum
  int radialSamples = 2048;
  double rMaxFactor = 8.0;     // rMax = factor * w(z)
  int helicityLo = -15;
  int helicityHi = 15;
  int modeMargin = 8;          // extra mask modes propagated beyond the window

  double k() const;
  cplx alpha() const;   // 1/w0^2 + i k / (2 z)
  double beta() const;  // k / z
  cplx Q() const;       // beta^2 / (8 alpha)
  cplx h0() const;      // i / (lambda z)
  double u0() const;    // sqrt(2 / (pi w0^2))
  double beam_radius() const;  // w(z)
  double rMax() const;
  double nu0() const;   // R / (lambda f')
  int mode_lo() const { return helicityLo - modeMargin; }
  int mode_hi() const { return helicityHi + modeMargin; }
  /// Throws std::invalid_argument on nonpositive lengths or an unresolved grid.
  void validate() const;
};

struct MaskSpectrum {
  int M = 0;
  std::vector<cplx> a;  // m = -M..M, t_A(phi) = sum a_m e^{i m phi}
  cplx operator[](int m) const { return std::abs(m) > M ? cplx(0.0) : a[static_cast<std::size_t>(m + M)]; }
  double total_power() const;
};

struct RadialField {
  int m = 0;
  std::vector<double> r;   // quadrature nodes on [0, rMax]
  std::vector<double> w;   // quadrature weights
  std::vector<cplx> u;
  /// 2 pi int |u|^2 r dr
  double power() const;
};

enum class PropagationMethod { closedForm, quadrature };

/// a_m = (1/2 pi) int t_A e^{-i m phi} dphi from N uniform samples; M <= (N-1)/2.
MaskSpectrum mask_spectrum(const std::vector<cplx>& maskSamples, int M);

/// Mask whose modes follow the state, a_m ~ Psi_m, scaled so max |t_A| = 1.
MaskSpectrum mask_from_state(const MomentumWavefunction& state);

/// A_m(r) = int_0^inf exp(-alpha r'^2) J_m(beta r r') r' dr'
cplx A_closed_form(int m, double r, const OpticalConfig& cfg);
std::vector<cplx> A_closed_form(int m, const std::vector<double>& r, const OpticalConfig& cfg);
cplx A_quadrature(int m, double r, const OpticalConfig& cfg);

/// Radial quadrature grid shared by all propagated modes.
quad::Rule radial_rule(const OpticalConfig& cfg);

/// u_m(r, z) for every m in [cfg.mode_lo(), cfg.mode_hi()] with a_m != 0, or for
/// all m in that range when allModes is set.
std::vector<RadialField> propagate(const MaskSpectrum& mask, const OpticalConfig& cfg,
                                   PropagationMethod method = PropagationMethod::closedForm,
                                   bool allModes = false);
RadialField propagate_mode(int m, const OpticalConfig& cfg, PropagationMethod method = PropagationMethod::closedForm);

/// d-th order Hankel transform 2 pi i^d int u(r) J_d(2 pi nu r) r dr.
std::vector<cplx> hankel(const RadialField& f, int d, const std::vector<double>& nu);

struct FocalDecomposition {
  int N = 0;
  quad::Rule nu;            // nodes on [0, nu0] followed by nodes on [nu0, nuMax]
  std::size_t innerCount = 0;  // nodes below nu0
  double nu0 = 0.0;
  double nuMax = 0.0;
  std::vector<int> modes;                 // input helicities
  std::vector<std::vector<cplx>> fields;  // Hankel transform of order m - N per mode
  const std::vector<cplx>& ubarN() const;  // the m = N entry; throws if absent
  const std::vector<cplx>& vbar(int m) const;
};

/// Fourier-plane decomposition for analyzer charge N on [0, nuMax]; nuMax <= 0
/// picks a full-plane extent.
FocalDecomposition analyzer_field(const std::vector<RadialField>& fields, int N, const OpticalConfig& cfg,
                                  double nuMax = 0.0);

struct DetectedPower {
  double signal = 0.0;     // P_N
  double crosstalk = 0.0;  // P_C
  double total() const { return signal + crosstalk; }
};

/// Powers captured inside nu0 = R/(lambda f'). fullPlane integrates to nuMax.
DetectedPower detected_power(const FocalDecomposition& dec, const MaskSpectrum& mask, const OpticalConfig& cfg,
                             bool fullPlane = false);

struct ResponseMatrix {
  int nLo = 0, nHi = 0;  // analyzer charges (rows)
  int mLo = 0, mHi = 0;  // input helicities (columns)
  std::vector<double> C;  // row-major
  double at(int N, int m) const;
  int rows() const { return nHi - nLo + 1; }
  int cols() const { return mHi - mLo + 1; }
  /// C[N][N] / sum_{m != N} C[N][m] over the given column range.
  double dominance(int N, int colLo, int colHi) const;
};

/// Captured power fractions 2 pi int_0^{nu_b} |H_{|d|}[u_m]|^2 nu dnu for
/// several cut-offs nu_b at once (sorted ascending). Result [b][pair].
struct PowerRequest {
  int m;
  int d;
};
std::vector<std::vector<double>> captured_power(const OpticalConfig& cfg, const std::vector<PowerRequest>& req,
                                                const std::vector<double>& nuBreaks);

/// Rows N in [nLo, nHi], columns m in [mLo, mHi] (defaults: window rows and
/// window-plus-margin columns).
ResponseMatrix response_matrix(const OpticalConfig& cfg);
ResponseMatrix response_matrix(const OpticalConfig& cfg, int nLo, int nHi, int mLo, int mHi);

struct NoiseModel {
  std::uint64_t seed = 1;
  double relativeLevel = 0.0;  // multiplicative Gaussian, standard deviation
};

struct MeasuredSpectrum {
  int nLo = 0, nHi = 0;
  std::vector<double> power;  // P(N)
  double at(int N) const { return power[static_cast<std::size_t>(N - nLo)]; }
};

MeasuredSpectrum simulate_spectrum(const MaskSpectrum& mask, const ResponseMatrix& C, const NoiseModel& noise);
MeasuredSpectrum simulate_spectrum(const MaskSpectrum& mask, const OpticalConfig& cfg, const NoiseModel& noise);
MeasuredSpectrum simulate_spectrum(const MomentumWavefunction& state, const OpticalConfig& cfg, const NoiseModel& noise);

struct ApertureScan {
  std::vector<double> radius;
  std::vector<double> loss;       // sum_N (1 - C[N][N])
  std::vector<double> crosstalk;  // sum_N sum_{m != N} C[N][m]
  std::vector<double> objective;
  std::size_t best = 0;
  double bestRadius() const { return radius[best]; }
};

/// Scans R over rGrid (strictly increasing, at least 3 entries).
ApertureScan optimize_aperture(const OpticalConfig& cfg, const std::vector<int>& modeSet,
                               const std::vector<double>& rGrid);
/// Geometric grid from 2 um to 200 um.
std::vector<double> default_aperture_grid(int points = 41);

}  // namespace orbita::optics
