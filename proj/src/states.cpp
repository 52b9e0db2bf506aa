#include "orbita/states.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "orbita/quadrature.hpp"
#include "orbita/special.hpp"

namespace orbita::states {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kStartTruncation = 64;
constexpr int kMaxTruncation = 1 << 20;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Overlap integral of the unwrapped cosine half-wave with itself shifted by s.
double cosine_autocorrelation(double alpha, double s) {
  if (s >= kPi * alpha) return 0.0;
  return ((kPi * alpha - s) * std::cos(s / alpha) + alpha * std::sin(s / alpha)) / (kPi * alpha);
}

// int_circle |wrapped cosine|^2 for the unit-normalized half-wave; 1 when alpha <= 2.
double cosine_wrapped_norm(double alpha) {
  double n = 1.0;
  for (int d = 1; kTwoPi * d < kPi * alpha; ++d) n += 2.0 * cosine_autocorrelation(alpha, kTwoPi * d);
  return n;
}

double truncated_norm_amplitude(double alpha) {
  // [pi erf^2(pi alpha) / alpha^2]^{-1/4}
  const double e = std::erf(kPi * alpha);
  return std::pow(kPi * e * e / (alpha * alpha), -0.25);
}

std::vector<cplx> coherent_coefficients(const StateParams& p, int M) {
  std::vector<cplx> c(2 * static_cast<std::size_t>(M) + 1);
  for (int m = -M; m <= M; ++m) {
    // w^m e^{-m^2/2} with w = e^{i theta - ell}
    const double mag = std::exp(-p.ell * m - 0.5 * static_cast<double>(m) * m);
    c[static_cast<std::size_t>(m + M)] = std::polar(mag, p.mu * m);
  }
  return c;
}

std::vector<cplx> von_mises_coefficients(double alpha, int M) {
  const double x = 1.0 / (2.0 * alpha);
  const auto I = special::bessel_i_scaled(x, M);
  const double I0_2x = special::bessel_i_scaled(2.0 * x, 0)[0];
  const double norm = 1.0 / std::sqrt(I0_2x);
  std::vector<cplx> c(2 * static_cast<std::size_t>(M) + 1);
  for (int m = -M; m <= M; ++m) c[static_cast<std::size_t>(m + M)] = I[static_cast<std::size_t>(std::abs(m))] * norm;
  return c;
}

std::vector<cplx> wedge_coefficients(double alpha, int M) {
  std::vector<cplx> c(2 * static_cast<std::size_t>(M) + 1);
  const double a = std::sqrt(alpha / kTwoPi);
  for (int m = -M; m <= M; ++m) c[static_cast<std::size_t>(m + M)] = a * special::sinc(0.5 * m * alpha);
  return c;
}

std::vector<cplx> wrapped_gaussian_coefficients(double sigma, int M) {
  std::size_t N = 64;
  while (N < 8 * (2 * static_cast<std::size_t>(M) + 1)) N <<= 1;
  AngularSamples s;
  s.values.resize(N);
  for (std::size_t j = 0; j < N; ++j) s.values[j] = std::sqrt(special::wrapped_normal_pdf(s.phi(j), 0.0, sigma));
  return analyze_coefficients(s, M);
}

std::vector<cplx> centered_coefficients(Family f, const StateParams& p, int M) {
  switch (f) {
    case Family::wedge:
      return wedge_coefficients(p.width, M);
    case Family::vonMises:
      return von_mises_coefficients(p.width, M);
    case Family::coherent:
      return coherent_coefficients(p, M);
    case Family::wrappedGaussian:
      return wrapped_gaussian_coefficients(p.width, M);
    case Family::cosine:
    case Family::truncatedGaussian:
      return quadrature_coefficients(f, p.width, M);
  }
  throw std::logic_error("unreachable");
}

double tail_of(const std::vector<cplx>& c) {
  const int M = static_cast<int>((c.size() - 1) / 2);
  const std::size_t w = std::min<std::size_t>(std::max(8, M / 16), static_cast<std::size_t>(M) + 1);
  double n2 = 0.0;
  for (const auto& v : c) n2 += std::norm(v);
  double t = 0.0;
  for (std::size_t i = 0; i < w; ++i) {
    t = std::max(t, std::norm(c[i]));
    t = std::max(t, std::norm(c[c.size() - 1 - i]));
  }
  return t / n2;
}

// Breakpoints of the wrapped amplitude inside [-pi, pi].
std::vector<double> breakpoints(Family f, double width) {
  std::vector<double> b{-kPi, kPi};
  auto add_wrapped = [&](double edge) {
    for (int j = -8; j <= 8; ++j) {
      const double x = edge + kTwoPi * j;
      if (x > -kPi && x < kPi) b.push_back(x);
    }
  };
  if (f == Family::wedge) {
    add_wrapped(0.5 * width);
    add_wrapped(-0.5 * width);
  } else if (f == Family::cosine) {
    add_wrapped(0.5 * kPi * width);
    add_wrapped(-0.5 * kPi * width);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end(), [](double x, double y) { return std::abs(x - y) < 1e-14; }), b.end());
  return b;
}

UncertaintyReport closed_report(Family f, const StatePackage& pkg) {
  UncertaintyReport r;
  r.meanE2 = cplx(kNaN, kNaN);
  r.varC = r.varS = kNaN;
  r.meanL2 = kNaN;
  r.angularDeviation = kNaN;
  r.varE = closed_form_varE(f, pkg.params.width);
  r.varL = closed_form_varL(f, pkg.params.width);
  if (f == Family::wedge) r.varL = wedge_window_variance(pkg.params.width, pkg.state.truncation());
  r.meanE = std::polar(std::sqrt(std::max(0.0, 1.0 - r.varE)), pkg.params.mu);
  r.meanC = r.meanE.real();
  r.meanS = r.meanE.imag();
  r.meanL = 0.0;
  r.product = std::sqrt(r.varE * r.varL);
  return r;
}

}  // namespace

std::string_view to_string(Family f) {
  switch (f) {
    case Family::wedge:
      return "wedge";
    case Family::cosine:
      return "cosine";
    case Family::vonMises:
      return "vonMises";
    case Family::truncatedGaussian:
      return "truncatedGaussian";
    case Family::wrappedGaussian:
      return "wrappedGaussian";
    case Family::coherent:
      return "coherent";
  }
  return "unknown";
}

Family family_from_string(std::string_view s) {
  const auto l = lower(s);
  if (l == "wedge") return Family::wedge;
  if (l == "cosine") return Family::cosine;
  if (l == "vonmises" || l == "von-mises" || l == "mises") return Family::vonMises;
  if (l == "truncated" || l == "truncatedgaussian") return Family::truncatedGaussian;
  if (l == "wrapped" || l == "wrappedgaussian") return Family::wrappedGaussian;
  if (l == "coherent") return Family::coherent;
  throw std::invalid_argument("unknown state family '" + std::string(s) + "'");
}

cplx coherent_w(const StateParams& p) { return std::polar(std::exp(-p.ell), p.mu); }

void validate(Family f, const StateParams& p) {
  const double a = p.width;
  if (!std::isfinite(p.mu) || !std::isfinite(p.ell)) throw std::invalid_argument("state parameters must be finite");
  if (p.truncation < 0) throw std::invalid_argument("truncation must be >= 0");
  switch (f) {
    case Family::wedge:
      if (!(a > 0.0 && a <= kTwoPi)) throw std::invalid_argument("wedge: need 0 < alpha <= 2 pi");
      break;
    case Family::cosine:
      if (!(a > 0.0 && a <= 16.0)) throw std::invalid_argument("cosine: need 0 < alpha <= 16");
      break;
    case Family::vonMises:
    case Family::truncatedGaussian:
      if (!(a > 0.0 && std::isfinite(a))) throw std::invalid_argument("need alpha > 0");
      if (f == Family::vonMises && a < 1e-4) throw std::invalid_argument("vonMises: alpha below 1e-4 is not supported");
      break;
    case Family::wrappedGaussian:
      if (!(a > 0.0 && std::isfinite(a))) throw std::invalid_argument("wrappedGaussian: need sigma > 0");
      if (a < 1e-3) throw std::invalid_argument("wrappedGaussian: sigma below 1e-3 is not supported");
      break;
    case Family::coherent:
      break;
  }
}

StatePackage make_state(Family family, const StateParams& params) {
  validate(family, params);
  StatePackage pkg;
  pkg.family = family;
  pkg.params = params;

  int M = params.truncation > 0 ? params.truncation : kStartTruncation;
  if (family == Family::coherent && params.truncation == 0) {
    M = std::max(M, static_cast<int>(std::ceil(std::abs(params.ell))) + 16);
  }
  std::vector<cplx> c;
  for (;;) {
    c = centered_coefficients(family, params, M);
    const bool ok = tail_of(c) <= kTailTolerance;
    if (ok || params.truncation > 0 || M >= kMaxTruncation) {
      pkg.converged = ok;
      break;
    }
    M *= 2;
  }
  MomentumWavefunction psi(std::move(c), true);
  // the coherent center is already carried by w
  if (family != Family::coherent && params.mu != 0.0) psi = shift_state(psi, params.mu, 0);
  pkg.state = std::move(psi);
  if (family != Family::coherent) pkg.closedForm = closed_report(family, pkg);
  if (family == Family::wedge) pkg.closedFormWindow = pkg.state.truncation();
  return pkg;
}

double closed_form_pm(Family f, const StateParams& p, int m) {
  const double a = p.width;
  switch (f) {
    case Family::wedge: {
      const double s = special::sinc(0.5 * m * a);
      return a / kTwoPi * s * s;
    }
    case Family::cosine: {
      const double x = std::abs(m) * a;
      const double s = special::sinc(0.5 * kPi * (x - 1.0));
      return a * s * s / ((x + 1.0) * (x + 1.0)) / cosine_wrapped_norm(a);
    }
    case Family::vonMises: {
      const double x = 1.0 / (2.0 * a);
      const double Im = special::bessel_i_scaled(x, std::abs(m))[static_cast<std::size_t>(std::abs(m))];
      return Im * Im / special::bessel_i_scaled(2.0 * x, 0)[0];
    }
    case Family::truncatedGaussian: {
      const double e = std::erf(kPi * a);
      const double S = special::scaled_re_erf(kPi * a / std::numbers::sqrt2, m / (std::numbers::sqrt2 * a));
      // one power of erf: the amplitude prefactor squared is a / (sqrt(pi) erf)
      return S * S / (std::sqrt(kPi) * a * e);
    }
    case Family::wrappedGaussian:
      return kNaN;
    case Family::coherent: {
      double z = 0.0;
      const int span = static_cast<int>(std::ceil(std::abs(p.ell))) + 40;
      const double center = -p.ell;
      auto w = [&](int k) { return std::exp(-2.0 * p.ell * k - static_cast<double>(k) * k - p.ell * p.ell); };
      for (int k = static_cast<int>(center) - span; k <= static_cast<int>(center) + span; ++k) z += w(k);
      return w(m) / z;
    }
  }
  return kNaN;
}

SpectrumClosedForm momentum_spectrum_closed_form(Family family, const StateParams& params, int mLo, int mHi) {
  validate(family, params);
  if (mHi < mLo) throw std::invalid_argument("momentum_spectrum_closed_form: empty range");
  SpectrumClosedForm s;
  s.family = family;
  s.params = params;
  s.mLo = mLo;
  s.pm.resize(static_cast<std::size_t>(mHi - mLo) + 1);
  if (family == Family::vonMises) {
    // one Bessel sequence for the whole range
    const double x = 1.0 / (2.0 * params.width);
    const int top = std::max(std::abs(mLo), std::abs(mHi));
    const auto I = special::bessel_i_scaled(x, top);
    const double I0 = special::bessel_i_scaled(2.0 * x, 0)[0];
    for (int m = mLo; m <= mHi; ++m) {
      const double v = I[static_cast<std::size_t>(std::abs(m))];
      s.pm[static_cast<std::size_t>(m - mLo)] = v * v / I0;
    }
    return s;
  }
  for (int m = mLo; m <= mHi; ++m) s.pm[static_cast<std::size_t>(m - mLo)] = closed_form_pm(family, params, m);
  return s;
}

double closed_form_varE(Family f, double a) {
  switch (f) {
    case Family::wedge: {
      const double s = special::sinc(0.5 * a);
      return 1.0 - s * s;
    }
    case Family::cosine: {
      if (a > 2.0) return kNaN;  // the half-wave overlaps itself once wrapped
      const double s = special::sinc(0.5 * kPi * (a - 2.0));
      return 1.0 - 16.0 * s * s / (a * a * (a + 2.0) * (a + 2.0));
    }
    case Family::vonMises: {
      const auto I = special::bessel_i_scaled(1.0 / a, 1);
      const double r = I[1] / I[0];
      return 1.0 - r * r;
    }
    case Family::truncatedGaussian: {
      const double e = std::erf(kPi * a);
      const double S = special::scaled_re_erf(kPi * a, 1.0 / (2.0 * a));
      return 1.0 - S * S / (e * e);
    }
    case Family::wrappedGaussian:
      return 1.0 - std::exp(-a * a);
    case Family::coherent:
      return kNaN;
  }
  return kNaN;
}

double closed_form_varL(Family f, double a) {
  switch (f) {
    case Family::wedge:
      return std::numeric_limits<double>::infinity();
    case Family::cosine:
      return a > 2.0 ? kNaN : 1.0 / (a * a);
    case Family::vonMises: {
      const auto I = special::bessel_i_scaled(1.0 / a, 1);
      return I[1] / (4.0 * a * I[0]);
    }
    case Family::truncatedGaussian: {
      const double e = std::erf(kPi * a);
      return 0.5 * a * a * (1.0 - 2.0 * std::sqrt(kPi) * a * std::exp(-kPi * kPi * a * a) / e);
    }
    case Family::wrappedGaussian:
    case Family::coherent:
      return kNaN;
  }
  return kNaN;
}

double wedge_window_variance(double alpha, int M) {
  StateParams p;
  p.width = alpha;
  double num = 0.0, den = 0.0;
  for (int m = -M; m <= M; ++m) {
    const double pm = closed_form_pm(Family::wedge, p, m);
    num += static_cast<double>(m) * m * pm;
    den += pm;
  }
  return num / den;
}

double angular_amplitude(Family f, double a, double phi) {
  const double x = std::remainder(phi, kTwoPi);
  switch (f) {
    case Family::wedge:
      return std::abs(x) <= 0.5 * a ? 1.0 / std::sqrt(a) : 0.0;
    case Family::cosine: {
      double s = 0.0;
      const double half = 0.5 * kPi * a;
      for (int j = -8; j <= 8; ++j) {
        const double u = x + kTwoPi * j;
        if (std::abs(u) <= half) s += std::cos(u / a);
      }
      return s * std::sqrt(2.0 / (kPi * a)) / std::sqrt(cosine_wrapped_norm(a));
    }
    case Family::vonMises: {
      // e^{cos(x)/(2a)} / sqrt(2 pi I0(1/a)), evaluated with scaled Bessel values
      const double k = 1.0 / a;
      const double I0s = special::bessel_i_scaled(k, 0)[0];
      return std::exp(0.5 * k * (std::cos(x) - 1.0)) / std::sqrt(kTwoPi * I0s);
    }
    case Family::truncatedGaussian:
      return truncated_norm_amplitude(a) * std::exp(-0.5 * a * a * x * x);
    case Family::wrappedGaussian:
      return std::sqrt(special::wrapped_normal_pdf(x, 0.0, a));
    case Family::coherent:
      break;
  }
  throw std::invalid_argument("angular_amplitude: family has no direct angular form");
}

std::vector<cplx> quadrature_coefficients(Family f, double a, int M) {
  double lo = -kPi, hi = kPi;
  std::function<double(double)> amp;
  switch (f) {
    case Family::wedge:
      lo = -0.5 * a;
      hi = 0.5 * a;
      amp = [a](double) { return 1.0 / std::sqrt(a); };
      break;
    case Family::cosine:
      // integrate the unwrapped half-wave: Fourier coefficients at integer m
      // are the same as those of the wrapped function
      lo = -0.5 * kPi * a;
      hi = 0.5 * kPi * a;
      amp = [a](double x) { return std::sqrt(2.0 / (kPi * a)) * std::cos(x / a); };
      break;
    case Family::truncatedGaussian: {
      const double c = truncated_norm_amplitude(a);
      amp = [a, c](double x) { return c * std::exp(-0.5 * a * a * x * x); };
      break;
    }
    case Family::vonMises:
    case Family::wrappedGaussian:
      amp = [f, a](double x) { return angular_amplitude(f, a, x); };
      break;
    case Family::coherent:
      throw std::invalid_argument("quadrature_coefficients: coherent states have no angular closed form");
  }
  const double L = hi - lo;
  const int panels = std::max(8, static_cast<int>(std::ceil(L * (M + 16) / 12.0)));
  const auto rule = quad::gauss_legendre(lo, hi, panels);
  std::vector<cplx> vals(rule.x.size());
  for (std::size_t j = 0; j < vals.size(); ++j) vals[j] = amp(rule.x[j]);
  return quad::fourier_integrals(rule, vals, M);
}

double quadrature_varE(Family f, double a) {
  const auto b = breakpoints(f, a);
  cplx e = 0.0;
  double n = 0.0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const int panels = std::max(4, static_cast<int>(std::ceil((b[i + 1] - b[i]) * 40.0)));
    const auto rule = quad::gauss_legendre(b[i], b[i + 1], panels);
    for (std::size_t j = 0; j < rule.x.size(); ++j) {
      const double psi = angular_amplitude(f, a, rule.x[j]);
      const double p = psi * psi;
      n += rule.w[j] * p;
      e += rule.w[j] * p * std::polar(1.0, rule.x[j]);
    }
  }
  return 1.0 - std::norm(e / n);
}

double quadrature_varL(Family f, double a) {
  validate(f, StateParams{a, 0.0, 0.0, 0});
  // dPsi/dphi of the centered (real) amplitude; <L> = 0 so varL = int |Psi'|^2
  std::function<double(double)> d;
  switch (f) {
    case Family::cosine:
      if (a > 2.0) throw std::invalid_argument("quadrature_varL: cosine needs alpha <= 2 (no overlap)");
      d = [a](double x) {
        return std::abs(x) > 0.5 * kPi * a ? 0.0 : -std::sqrt(2.0 / (kPi * a)) * std::sin(x / a) / a;
      };
      break;
    case Family::vonMises:
      d = [a](double x) { return -angular_amplitude(Family::vonMises, a, x) * std::sin(x) / (2.0 * a); };
      break;
    case Family::truncatedGaussian:
      d = [a](double x) { return -a * a * x * angular_amplitude(Family::truncatedGaussian, a, x); };
      break;
    default:
      throw std::invalid_argument("quadrature_varL: no smooth angular derivative for this family");
  }
  const auto b = breakpoints(f, a);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const int panels = std::max(4, static_cast<int>(std::ceil((b[i + 1] - b[i]) * 40.0)));
    const auto rule = quad::gauss_legendre(b[i], b[i + 1], panels);
    for (std::size_t j = 0; j < rule.x.size(); ++j) s += rule.w[j] * d(rule.x[j]) * d(rule.x[j]);
  }
  return s;
}

EigenResidualReport verify_eigenrelations(const StatePackage& pkg) {
  EigenResidualReport rep;
  if (pkg.family == Family::vonMises) {
    if (pkg.params.mu != 0.0) throw std::invalid_argument("verify_eigenrelations: von Mises check needs mu = 0");
    const auto& psi = pkg.state.coefficients();
    const int M = pkg.state.truncation();
    rep.kappa = 1.0 / (2.0 * pkg.params.width);
    const auto Ep = apply_E(psi);
    const auto Em = apply_Edag(psi);
    double r2 = 0.0;
    for (int m = -M; m <= M; ++m) {
      const std::size_t i = static_cast<std::size_t>(m + M);
      // (L + i kappa S) psi with S = (E - E^+)/(2i)
      const cplx v = static_cast<double>(m) * psi[i] + 0.5 * rep.kappa * (Ep[i] - Em[i]);
      r2 += std::norm(v);
    }
    rep.eigenResidual = std::sqrt(r2);
    const auto r = uncertainty_report(pkg.state);
    rep.saturationGap = std::abs(r.varS * r.varL - r.meanC * r.meanC / 4.0);
    return rep;
  }
  if (pkg.family == Family::coherent) {
    const cplx w = coherent_w(pkg.params);
    rep.eigenvalue = w;
    const int M0 = pkg.state.truncation();
    const int M = M0 + 2;
    const auto psi = pkg.state.padded(M).coefficients();
    const std::size_t n = psi.size();
    auto idx = [M](int m) { return static_cast<std::size_t>(m + M); };
    // (W psi)_m = e^{m+1/2} psi_{m+1};  (W^+ psi)_m = e^{m-1/2} psi_{m-1}
    std::vector<cplx> Wpsi(n, 0.0), Wdpsi(n, 0.0);
    for (int m = -M; m <= M; ++m) {
      if (m + 1 <= M) Wpsi[idx(m)] = std::exp(m + 0.5) * psi[idx(m + 1)];
      if (m - 1 >= -M) Wdpsi[idx(m)] = std::exp(m - 0.5) * psi[idx(m - 1)];
    }
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) r2 += std::norm(Wpsi[i] - w * psi[i]);
    rep.eigenResidual = std::sqrt(r2);

    const double s2 = std::numbers::sqrt2;
    std::vector<cplx> Q(n), P(n);
    for (std::size_t i = 0; i < n; ++i) {
      Q[i] = (Wpsi[i] + Wdpsi[i]) / s2;
      P[i] = (Wpsi[i] - Wdpsi[i]) / (s2 * cplx(0.0, 1.0));
    }
    auto inner = [&](const std::vector<cplx>& a, const std::vector<cplx>& b) {
      cplx s = 0.0;
      for (std::size_t i = 0; i < n; ++i) s += std::conj(a[i]) * b[i];
      return s;
    };
    const double q1 = inner(psi, Q).real(), p1 = inner(psi, P).real();
    const double varQ = inner(Q, Q).real() - q1 * q1;
    const double varP = inner(P, P).real() - p1 * p1;
    const cplx comm = 2.0 * cplx(0.0, 1.0) * inner(Q, P).imag();
    rep.saturationGap = std::abs(varQ * varP - std::norm(comm) / 4.0);

    // <[W, W^+]> = <W^+ psi|W^+ psi> - <W psi|W psi>
    const double wwd = inner(Wdpsi, Wdpsi).real() - inner(Wpsi, Wpsi).real();
    double e2l = 0.0;
    for (int m = -M; m <= M; ++m) e2l += std::exp(2.0 * m) * std::norm(psi[idx(m)]);
    rep.commutatorGap = std::abs(wwd - 2.0 * std::sinh(1.0) * e2l);
    return rep;
  }
  throw std::invalid_argument("verify_eigenrelations: family has no defining eigenrelation");
}

}  // namespace orbita::states
