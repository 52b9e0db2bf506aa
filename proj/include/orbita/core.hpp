#pragma once

// States on the circle in the angular-momentum basis, the angle <-> momentum
// Fourier pair, circular moments and uncertainty statistics.
//
// Conventions (fixed once, relied on everywhere):
//   Psi(phi) = (1/sqrt(2 pi)) sum_m e^{-i m phi} Psi_m
//   Psi_m    = (1/sqrt(2 pi)) int_0^{2 pi} e^{i m phi} Psi(phi) dphi
//   E|m> = |m-1>, i.e. E acts as multiplication by e^{i phi}
//   <E> = sum_m conj(Psi_m) Psi_{m+1}
//   L acts as +i d/dphi on Psi(phi)
// An angle shift by phi' multiplies Psi_m by e^{i m phi'} and <E> by e^{i phi'}.

#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace orbita {

using cplx = std::complex<double>;

inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kTailTolerance = 1e-12;

class MomentumWavefunction {
 public:
  MomentumWavefunction() = default;

  /// coeffs holds m = -M..M (size 2M+1). Normalizes unless normalize = false,
  /// in which case the input must already be normalized.
  MomentumWavefunction(std::vector<cplx> coeffs, bool normalize = true);

  /// |m> for m in [-M, M].
  static MomentumWavefunction basis(int m, int M);

  int truncation() const { return M_; }
  std::size_t size() const { return coeffs_.size(); }
  const std::vector<cplx>& coefficients() const { return coeffs_; }
  cplx operator[](int m) const;  // zero outside the window
  std::vector<double> probabilities() const;

  /// max |Psi_m|^2 over the outermost max(8, M/16) coefficients on each side.
  double tail_weight() const;
  bool converged() const { return tail_weight() <= kTailTolerance; }

  /// Same state embedded in a larger window (zero padded).
  MomentumWavefunction padded(int M) const;

 private:
  int M_ = 0;
  std::vector<cplx> coeffs_;
};

struct AngularSamples {
  std::vector<cplx> values;  // Psi(2 pi j / N)
  std::size_t grid_size() const { return values.size(); }
  double phi(std::size_t j) const;
};

struct UncertaintyReport {
  cplx meanE{0.0, 0.0};
  cplx meanE2{0.0, 0.0};
  double meanL = 0.0;
  double meanL2 = 0.0;
  double varE = 0.0;
  double varL = 0.0;
  double varC = 0.0;
  double varS = 0.0;
  double meanC = 0.0;
  double meanS = 0.0;
  double product = 0.0;  // sqrt(varE * varL)
  // largest deviation between momentum-space and angle-grid moments; NaN when
  // the grid check was skipped (very large windows)
  double angularDeviation = 0.0;

  /// varE varL - (1 - varE)/4
  double dispersion_slack() const;
  /// varC varL - <S>^2/4 and varS varL - <C>^2/4 (Robertson with [L, C] = -iS,
  /// [L, S] = iC)
  double cosine_slack() const;
  double sine_slack() const;
};

struct PovmKernel {
  int Lmax = 0;
  std::vector<cplx> lambdas;  // l = -Lmax..Lmax
  bool delta = false;         // ideal measurement: lambda_l = 1 for every l

  /// K = delta(phi); the projection-valued measure.
  static PovmKernel ideal();
  static PovmKernel from_lambdas(std::vector<cplx> lambdas);  // validates
  cplx lambda(int l) const;
  /// K(phi) = (1/2 pi) sum_l lambda_l e^{i l phi}; throws for the delta kernel
  double density(double phi) const;
  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// Angular samples on N >= 2M+1 points.
AngularSamples synthesize(const MomentumWavefunction& state, std::size_t gridSize);

/// Momentum coefficients m = -M..M from samples (N >= 2M+1). The result is
/// not renormalized.
std::vector<cplx> analyze_coefficients(const AngularSamples& samples, int M);
MomentumWavefunction analyze(const AngularSamples& samples, int M);

/// Throws when the state is not normalized.
UncertaintyReport uncertainty_report(const MomentumWavefunction& state);

/// The same moments computed purely on an angle grid of N points (derivatives
/// taken spectrally). Used as the internal cross-check.
UncertaintyReport uncertainty_report_angular(const MomentumWavefunction& state, std::size_t gridSize);

/// p_out(phi) = int K(phi') p(phi + phi') dphi' on the same uniform grid.
std::vector<double> povm_smooth(const std::vector<double>& density, const PovmKernel& kernel);

/// Psi_m -> e^{i m angleShift} Psi_m, then Psi'_{m + momentumShift} = Psi_m.
MomentumWavefunction shift_state(const MomentumWavefunction& state, double angleShift, int momentumShift);

// (Ê Psi)_m = Psi_{m+1}; helpers shared with the state verifiers
std::vector<cplx> apply_E(const std::vector<cplx>& psi);
std::vector<cplx> apply_Edag(const std::vector<cplx>& psi);

// CSV (JSON lives in io.hpp)
void write_momentum_csv(std::ostream& os, const MomentumWavefunction& state);
void write_angular_csv(std::ostream& os, const AngularSamples& samples);

}  // namespace orbita
