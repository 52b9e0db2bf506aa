#pragma once

// Suboptimal and reference state families on the circle.
//
//   wedge              Psi = 1/sqrt(alpha) on |phi| <= alpha/2
//   cosine             Psi = sqrt(2/(pi alpha)) cos(phi/alpha) on |phi| <= pi alpha/2 (wrapped when alpha > 2)
//   vonMises           Psi = exp(cos(phi)/(2 alpha)) / sqrt(2 pi I0(1/alpha))
//   truncatedGaussian  Psi ~ exp(-alpha^2 phi^2 / 2) on [-pi, pi]
//   wrappedGaussian    Psi = sqrt(p), p the wrapped normal density with parameter sigma (= width)
//   coherent           Psi_m ~ w^m e^{-m^2/2}, w = e^{i theta - ell}
//
// All families are built centered at 0 and then moved with shift_state.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "orbita/core.hpp"

namespace orbita::states {

enum class Family { wedge, cosine, vonMises, truncatedGaussian, wrappedGaussian, coherent };

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);  // throws std::invalid_argument

struct StateParams {
  double width = 1.0;  // alpha (sigma for the wrapped Gaussian); unused for coherent
  double mu = 0.0;     // center; theta for coherent
  double ell = 0.0;    // coherent log-radius
  int truncation = 0;  // 0: grow until the tail criterion holds
};

struct StatePackage {
  Family family = Family::vonMises;
  StateParams params;
  MomentumWavefunction state;
  bool converged = false;
  // closed-form statistics; fields without a closed form are NaN
  std::optional<UncertaintyReport> closedForm;
  // wedge only: window over which closedForm->varL was summed
  int closedFormWindow = 0;
};

struct SpectrumClosedForm {
  Family family = Family::vonMises;
  StateParams params;
  int mLo = 0;
  std::vector<double> pm;  // m = mLo, mLo+1, ...
};

/// Throws std::invalid_argument for out-of-range parameters.
void validate(Family family, const StateParams& params);

StatePackage make_state(Family family, const StateParams& params);

SpectrumClosedForm momentum_spectrum_closed_form(Family family, const StateParams& params, int mLo, int mHi);
double closed_form_pm(Family family, const StateParams& params, int m);

/// Closed-form circular variance; NaN where none exists.
double closed_form_varE(Family family, double width);
/// Closed-form momentum variance; +inf for the wedge, NaN where none exists.
double closed_form_varL(Family family, double width);

/// Wedge: sum_{|m|<=M} m^2 p_m / sum_{|m|<=M} p_m.
double wedge_window_variance(double alpha, int M);

/// Momentum coefficients Psi_m, m = -M..M, obtained by Gauss-Legendre
/// quadrature of the angular amplitude over its support (no closed form used).
std::vector<cplx> quadrature_coefficients(Family family, double width, int M);

/// Angular amplitude Psi(phi) of the centered family member.
double angular_amplitude(Family family, double width, double phi);

/// varE = 1 - |<e^{i phi}>|^2 by quadrature of the angular density.
double quadrature_varE(Family family, double width);

/// varL = int |Psi'|^2 dphi by quadrature; cosine (alpha <= 2), von Mises and
/// truncated Gaussian only.
double quadrature_varL(Family family, double width);

struct EigenResidualReport {
  double eigenResidual = 0.0;     // ||(L + i kappa S) Psi|| or ||W Psi - w Psi||
  double saturationGap = 0.0;     // |varS varL - <C>^2/4| or |dQ^2 dP^2 - |<[Q,P]>|^2/4|
  double commutatorGap = 0.0;     // coherent: |<[W,W^+]> - 2 sinh(1) <e^{2L}>|
  double kappa = 0.0;             // von Mises only
  cplx eigenvalue{0.0, 0.0};      // w for coherent
};

/// von Mises: (L + i kappa S) Psi = 0 with kappa = 1/(2 alpha) and saturation of
/// varS varL >= <C>^2/4. Coherent: W Psi = w Psi and Robertson saturation for the
/// quadratures Q = (W + W^+)/sqrt2, P = (W - W^+)/(sqrt2 i).
EigenResidualReport verify_eigenrelations(const StatePackage& pkg);

/// Coherent amplitude w = e^{i theta - ell}.
cplx coherent_w(const StateParams& params);

}  // namespace orbita::states
