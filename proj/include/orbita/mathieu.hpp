#pragma once

// Angular Mathieu functions ce_{2n}(eta, q) as constrained intelligent states.
//
// With eta = phi/2, ce_{2n} = sum_k A_{2k} cos(2k eta) = sum_k A_{2k} cos(k phi)
// and the coefficients solve the even sector of H = L^2 + (q/2) cos(phi).
// In the orthonormal basis {1, sqrt(2) cos(k phi)} that sector is a symmetric
// tridiagonal matrix with diagonal k^2 and off-diagonal q/4, except the (0,1)
// entry q/(2 sqrt 2). Its eigenvalues eps relate to Mathieu characteristic
// values through a = 4 eps.

#include <vector>

#include "orbita/core.hpp"

namespace orbita::mathieu {

enum class Parity { even, odd };

struct MathieuMode {
  int n = 0;         // ce_{2n} (even) or se_{2n+2} (odd)
  double q = 0.0;
  double charValue = 0.0;     // a_{2n}(q) or b_{2n+2}(q)
  std::vector<double> coeffs;  // A_{2k}, k = 0..K (odd: B_{2k}, k = 1..K stored from index 0)
  int truncation = 0;          // K
  Parity parity = Parity::even;
};

struct UncertaintyCurvePoint {
  double q = 0.0;
  double varE = 0.0;
  double varL = 0.0;
  double product = 0.0;
  int n = 0;
  bool regimeWarning = false;  // asymptotic formula used outside its range
};

/// Modes n = 0..nMax sorted by characteristic value. truncation = 0 picks a
/// starting size automatically; either way K is doubled until the trailing
/// coefficients fall below 1e-14 (cap 4096).
std::vector<MathieuMode> solve_modes(double q, int nMax, int truncation = 0, Parity parity = Parity::even);

/// Single even mode convenience wrapper.
MathieuMode solve_mode(double q, int n);

/// Theta = 2 A0 A2 + sum_{k>=1} A_{2k} A_{2k+2}
double theta(const MathieuMode& mode);

/// Closed-form variances from (a, q, Theta), cross-checked against the
/// momentum-space statistics of the converted wavefunction to 1e-8.
UncertaintyCurvePoint mode_uncertainties(const MathieuMode& mode);

enum class Regime { small, large };
UncertaintyCurvePoint asymptotic_uncertainties(int n, double q, Regime regime);

std::vector<UncertaintyCurvePoint> sweep_uncertainty_curve(int nMax, const std::vector<double>& qGrid);

/// Psi_0 = sqrt(2) A0, Psi_{+-k} = A_{2k}/sqrt(2) (odd: Psi_{+-k} = +-i B_{2k}/sqrt(2)).
MomentumWavefunction to_wavefunction(const MathieuMode& mode, int M = -1);

/// ce_{2n}(eta, q) (or se_{2n+2}) evaluated from the coefficients.
double evaluate(const MathieuMode& mode, double eta);
double evaluate_d2(const MathieuMode& mode, double eta);

/// Fundamental-mode p_m = |Psi_m|^2 for m = -M..M.
std::vector<double> fundamental_spectrum(double q, int M);

/// q of mode n whose circular variance equals varE (bisection in log q over
/// [1e-8, 1e8]).
double q_for_variance(double varE, int n = 0);

}  // namespace orbita::mathieu
