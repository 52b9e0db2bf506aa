#include "orbita/core.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <span>
#include <stdexcept>

#include "orbita/kernels.hpp"

namespace orbita {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const double kSqrtTwoPi = std::sqrt(kTwoPi);

// Largest window for which uncertainty_report runs the angle-grid check.
constexpr int kCrossCheckMaxM = 1 << 14;
constexpr double kCrossCheckTolerance = 1e-10;

std::size_t wrap_index(long m, std::size_t N) {
  const long n = static_cast<long>(N);
  return static_cast<std::size_t>(((m % n) + n) % n);
}

std::size_t crosscheck_grid(int M) {
  std::size_t N = 8;
  while (N < 2 * static_cast<std::size_t>(M) + 4) N <<= 1;
  return N;
}

void fill_derived(UncertaintyReport& r) {
  r.varE = std::clamp(1.0 - std::norm(r.meanE), 0.0, 1.0);
  r.varL = std::max(0.0, r.meanL2 - r.meanL * r.meanL);
  r.meanC = r.meanE.real();
  r.meanS = r.meanE.imag();
  const double c2 = (2.0 + 2.0 * r.meanE2.real()) / 4.0;
  const double s2 = (2.0 - 2.0 * r.meanE2.real()) / 4.0;
  r.varC = std::max(0.0, c2 - r.meanC * r.meanC);
  r.varS = std::max(0.0, s2 - r.meanS * r.meanS);
  r.product = std::sqrt(r.varE * r.varL);
}

double moment_deviation(const UncertaintyReport& a, const UncertaintyReport& b) {
  const double scaleL = 1.0 + std::sqrt(std::max(a.meanL2, 0.0));
  double d = std::abs(a.meanE - b.meanE);
  d = std::max(d, std::abs(a.meanE2 - b.meanE2));
  d = std::max(d, std::abs(a.meanL - b.meanL) / scaleL);
  d = std::max(d, std::abs(a.meanL2 - b.meanL2) / (scaleL * scaleL));
  return d;
}

}  // namespace

// ---------------------------------------------------------------------------

MomentumWavefunction::MomentumWavefunction(std::vector<cplx> coeffs, bool normalize)
    : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty() || coeffs_.size() % 2 == 0) {
    throw std::invalid_argument("MomentumWavefunction: need 2M+1 coefficients");
  }
  M_ = static_cast<int>((coeffs_.size() - 1) / 2);
  double n2 = 0.0;
  for (const auto& c : coeffs_) n2 += std::norm(c);
  if (!std::isfinite(n2) || n2 <= 0.0) {
    throw std::invalid_argument("MomentumWavefunction: zero or non-finite norm");
  }
  if (normalize) {
    const double s = 1.0 / std::sqrt(n2);
    for (auto& c : coeffs_) c *= s;
  } else if (std::abs(n2 - 1.0) > kNormTolerance) {
    throw std::invalid_argument("MomentumWavefunction: state is not normalized");
  }
}

MomentumWavefunction MomentumWavefunction::basis(int m, int M) {
  if (M < 0 || std::abs(m) > M) throw std::invalid_argument("basis: |m| must be <= M");
  std::vector<cplx> c(2 * static_cast<std::size_t>(M) + 1, 0.0);
  c[static_cast<std::size_t>(m + M)] = 1.0;
  return MomentumWavefunction(std::move(c), false);
}

cplx MomentumWavefunction::operator[](int m) const {
  if (std::abs(m) > M_) return 0.0;
  return coeffs_[static_cast<std::size_t>(m + M_)];
}

std::vector<double> MomentumWavefunction::probabilities() const {
  std::vector<double> p(coeffs_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(coeffs_[i]);
  return p;
}

double MomentumWavefunction::tail_weight() const {
  const std::size_t w = std::min<std::size_t>(std::max(8, M_ / 16), static_cast<std::size_t>(M_) + 1);
  double t = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    t = std::max(t, std::norm(coeffs_[i]));
    t = std::max(t, std::norm(coeffs_[coeffs_.size() - 1 - i]));
  }
  return t;
}

MomentumWavefunction MomentumWavefunction::padded(int M) const {
  if (M < M_) throw std::invalid_argument("padded: window can only grow");
  std::vector<cplx> c(2 * static_cast<std::size_t>(M) + 1, 0.0);
  std::copy(coeffs_.begin(), coeffs_.end(), c.begin() + (M - M_));
  return MomentumWavefunction(std::move(c), false);
}

double AngularSamples::phi(std::size_t j) const {
  return kTwoPi * static_cast<double>(j) / static_cast<double>(values.size());
}

double UncertaintyReport::dispersion_slack() const { return varE * varL - (1.0 - varE) / 4.0; }
double UncertaintyReport::cosine_slack() const { return varC * varL - meanS * meanS / 4.0; }
double UncertaintyReport::sine_slack() const { return varS * varL - meanC * meanC / 4.0; }

// ---------------------------------------------------------------------------

PovmKernel PovmKernel::ideal() {
  PovmKernel k;
  k.lambdas = {1.0};
  k.delta = true;
  return k;
}

PovmKernel PovmKernel::from_lambdas(std::vector<cplx> lambdas) {
  if (lambdas.empty() || lambdas.size() % 2 == 0) {
    throw std::invalid_argument("PovmKernel: need 2L+1 coefficients");
  }
  PovmKernel k;
  k.Lmax = static_cast<int>((lambdas.size() - 1) / 2);
  k.lambdas = std::move(lambdas);
  k.validate();
  return k;
}

cplx PovmKernel::lambda(int l) const {
  if (delta) return 1.0;
  if (std::abs(l) > Lmax) return 0.0;
  return lambdas[static_cast<std::size_t>(l + Lmax)];
}

double PovmKernel::density(double phi) const {
  if (delta) throw std::logic_error("PovmKernel: the delta kernel has no pointwise density");
  double s = 0.0;
  for (int l = -Lmax; l <= Lmax; ++l) s += (lambda(l) * std::polar(1.0, l * phi)).real();
  return s / kTwoPi;
}

void PovmKernel::validate() const {
  constexpr double tol = 1e-12;
  if (lambdas.size() != 2 * static_cast<std::size_t>(Lmax) + 1) {
    throw std::invalid_argument("PovmKernel: size does not match Lmax");
  }
  if (std::abs(lambda(0) - 1.0) > tol) {
    throw std::invalid_argument("PovmKernel: lambda_0 must be 1 (completeness)");
  }
  for (int l = 1; l <= Lmax; ++l) {
    if (std::abs(lambda(-l) - std::conj(lambda(l))) > tol) {
      throw std::invalid_argument("PovmKernel: lambda_{-l} must equal conj(lambda_l)");
    }
    if (std::abs(lambda(l)) > 1.0 + tol) throw std::invalid_argument("PovmKernel: |lambda_l| > 1");
  }
  if (delta) return;
  const int n = 16 * (2 * Lmax + 1) + 64;
  for (int j = 0; j < n; ++j) {
    if (density(kTwoPi * j / n) < -tol) throw std::invalid_argument("PovmKernel: kernel is not positive");
  }
}

// ---------------------------------------------------------------------------

AngularSamples synthesize(const MomentumWavefunction& state, std::size_t gridSize) {
  const int M = state.truncation();
  if (gridSize < 2 * static_cast<std::size_t>(M) + 1) {
    throw std::invalid_argument("synthesize: grid smaller than 2M+1 would alias");
  }
  std::vector<cplx> buf(gridSize, 0.0);
  for (int m = -M; m <= M; ++m) buf[wrap_index(m, gridSize)] = state[m];
  AngularSamples out;
  Eigen::FFT<double> fft;
  fft.fwd(out.values, buf);
  for (auto& v : out.values) v /= kSqrtTwoPi;
  return out;
}

std::vector<cplx> analyze_coefficients(const AngularSamples& samples, int M) {
  const std::size_t N = samples.grid_size();
  if (M < 0 || N < 2 * static_cast<std::size_t>(M) + 1) {
    throw std::invalid_argument("analyze: requested M too large for the grid");
  }
  std::vector<cplx> spec;
  Eigen::FFT<double> fft;
  fft.inv(spec, samples.values);
  std::vector<cplx> c(2 * static_cast<std::size_t>(M) + 1);
  for (int m = -M; m <= M; ++m) c[static_cast<std::size_t>(m + M)] = kSqrtTwoPi * spec[wrap_index(m, N)];
  return c;
}

MomentumWavefunction analyze(const AngularSamples& samples, int M) {
  return MomentumWavefunction(analyze_coefficients(samples, M), true);
}

// ---------------------------------------------------------------------------

UncertaintyReport uncertainty_report(const MomentumWavefunction& state) {
  const auto& psi = state.coefficients();
  const int M = state.truncation();
  double n2 = 0.0;
  for (const auto& c : psi) n2 += std::norm(c);
  if (std::abs(n2 - 1.0) > kNormTolerance) {
    throw std::invalid_argument("uncertainty_report: state is not normalized");
  }
  const std::span<const cplx> all(psi);
  const std::size_t n = psi.size();

  UncertaintyReport r;
  if (n > 1) r.meanE = kernels::cdot(all.first(n - 1), all.last(n - 1));
  if (n > 2) r.meanE2 = kernels::cdot(all.first(n - 2), all.last(n - 2));
  std::vector<double> mw(n), m2w(n);
  for (int m = -M; m <= M; ++m) {
    mw[static_cast<std::size_t>(m + M)] = m;
    m2w[static_cast<std::size_t>(m + M)] = static_cast<double>(m) * m;
  }
  r.meanL = kernels::weighted_norm2(mw, psi);
  r.meanL2 = kernels::weighted_norm2(m2w, psi);
  fill_derived(r);

  if (M <= kCrossCheckMaxM) {
    const auto a = uncertainty_report_angular(state, crosscheck_grid(M));
    r.angularDeviation = moment_deviation(r, a);
    if (r.angularDeviation > kCrossCheckTolerance) {
      throw std::runtime_error("uncertainty_report: momentum and angle-grid moments disagree");
    }
  } else {
    r.angularDeviation = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

UncertaintyReport uncertainty_report_angular(const MomentumWavefunction& state, std::size_t gridSize) {
  const int M = state.truncation();
  if (gridSize < 2 * static_cast<std::size_t>(M) + 3) {
    throw std::invalid_argument("uncertainty_report_angular: grid too small for exact quadrature");
  }
  const auto psi = synthesize(state, gridSize);
  std::vector<cplx> dcoef(state.size());
  for (int m = -M; m <= M; ++m) dcoef[static_cast<std::size_t>(m + M)] = cplx(0.0, -m) * state[m];
  // derivative samples: synthesize without renormalizing
  std::vector<cplx> buf(gridSize, 0.0);
  for (int m = -M; m <= M; ++m) buf[wrap_index(m, gridSize)] = dcoef[static_cast<std::size_t>(m + M)];
  std::vector<cplx> dpsi;
  Eigen::FFT<double> fft;
  fft.fwd(dpsi, buf);
  for (auto& v : dpsi) v /= kSqrtTwoPi;

  const double h = kTwoPi / static_cast<double>(gridSize);
  UncertaintyReport r;
  cplx e1 = 0.0, e2 = 0.0, l1 = 0.0;
  double l2 = 0.0;
  for (std::size_t j = 0; j < gridSize; ++j) {
    const double phi = psi.phi(j);
    const double p = std::norm(psi.values[j]);
    e1 += p * std::polar(1.0, phi);
    e2 += p * std::polar(1.0, 2.0 * phi);
    l1 += std::conj(psi.values[j]) * cplx(0.0, 1.0) * dpsi[j];
    l2 += std::norm(dpsi[j]);
  }
  r.meanE = h * e1;
  r.meanE2 = h * e2;
  r.meanL = h * l1.real();
  r.meanL2 = h * l2;
  fill_derived(r);
  r.angularDeviation = 0.0;
  return r;
}

// ---------------------------------------------------------------------------

std::vector<double> povm_smooth(const std::vector<double>& density, const PovmKernel& kernel) {
  kernel.validate();
  const std::size_t N = density.size();
  if (N < 2) throw std::invalid_argument("povm_smooth: grid too small");
  double total = 0.0;
  for (double p : density) total += p;
  total *= kTwoPi / static_cast<double>(N);
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw std::invalid_argument("povm_smooth: density is not normalized");
  }
  std::vector<cplx> in(density.begin(), density.end()), spec, out;
  Eigen::FFT<double> fft;
  fft.fwd(spec, in);
  // spec[k] carries c_l e^{-i l phi} with l = k (or k - N); multiply by lambda_{-l}
  for (std::size_t k = 0; k < N; ++k) {
    const long l = (2 * k < N) ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(N);
    cplx lam = kernel.lambda(static_cast<int>(-l));
    if (2 * k == N) lam = kernel.lambda(static_cast<int>(l)).real();  // Nyquist bin is shared by +-l
    spec[k] *= lam;
  }
  fft.inv(out, spec);
  std::vector<double> p(N);
  for (std::size_t j = 0; j < N; ++j) p[j] = out[j].real();
  return p;
}

MomentumWavefunction shift_state(const MomentumWavefunction& state, double angleShift, int momentumShift) {
  const int M = state.truncation();
  std::vector<cplx> c(state.size(), 0.0);
  for (int m = -M; m <= M; ++m) {
    const cplx v = state[m] * std::polar(1.0, m * angleShift);
    const int target = m + momentumShift;
    if (std::abs(target) > M) {
      if (std::norm(v) > 1e-30) throw std::invalid_argument("shift_state: support leaves the window");
      continue;
    }
    c[static_cast<std::size_t>(target + M)] = v;
  }
  return MomentumWavefunction(std::move(c), true);
}

std::vector<cplx> apply_E(const std::vector<cplx>& psi) {
  std::vector<cplx> out(psi.size(), 0.0);
  for (std::size_t i = 0; i + 1 < psi.size(); ++i) out[i] = psi[i + 1];
  return out;
}

std::vector<cplx> apply_Edag(const std::vector<cplx>& psi) {
  std::vector<cplx> out(psi.size(), 0.0);
  for (std::size_t i = 1; i < psi.size(); ++i) out[i] = psi[i - 1];
  return out;
}

void write_momentum_csv(std::ostream& os, const MomentumWavefunction& state) {
  os.precision(17);
  os << "m,p_m\n";
  const int M = state.truncation();
  for (int m = -M; m <= M; ++m) os << m << ',' << std::norm(state[m]) << '\n';
}

void write_angular_csv(std::ostream& os, const AngularSamples& samples) {
  os.precision(17);
  os << "phi,p_phi\n";
  for (std::size_t j = 0; j < samples.grid_size(); ++j) {
    os << samples.phi(j) << ',' << std::norm(samples.values[j]) << '\n';
  }
}

}  // namespace orbita
