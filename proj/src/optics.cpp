#include "orbita/optics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>

#include "orbita/kernels.hpp"
#include "orbita/parallel.hpp"
#include "orbita/special.hpp"

namespace orbita::optics {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

cplx i_pow(int d) {
  switch (((d % 4) + 4) % 4) {
    case 0:
      return {1.0, 0.0};
    case 1:
      return {0.0, 1.0};
    case 2:
      return {-1.0, 0.0};
    default:
      return {0.0, -1.0};
  }
}

double sign_pow(int m) { return (std::abs(m) % 2 == 0) ? 1.0 : -1.0; }

// Integrand weights g_j = w_j r_j u(r_j) for the radial Hankel sums.
std::vector<cplx> hankel_weights(const RadialField& f) {
  std::vector<cplx> g(f.u.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = f.w[j] * f.r[j] * f.u[j];
  return g;
}

// out[q][k] = 2 pi i^{d_q} sum_j J_{d_q}(2 pi nu_k r_j) g_{field_q}[j]
std::vector<std::vector<cplx>> focal_transforms(const std::vector<std::vector<cplx>>& g, const std::vector<double>& r,
                                                const std::vector<int>& order, const std::vector<std::size_t>& field,
                                                const std::vector<double>& nu) {
  int dmax = 0;
  for (int d : order) dmax = std::max(dmax, std::abs(d));
  const std::size_t S = r.size();
  std::vector<std::vector<cplx>> out(order.size(), std::vector<cplx>(nu.size()));
  parallel_for(nu.size(), [&](std::size_t k) {
    std::vector<double> table(static_cast<std::size_t>(dmax + 1) * S);
    for (std::size_t j = 0; j < S; ++j) {
      const auto J = special::bessel_j(kTwoPi * nu[k] * r[j], dmax);
      for (int d = 0; d <= dmax; ++d) table[static_cast<std::size_t>(d) * S + j] = J[static_cast<std::size_t>(d)];
    }
    for (std::size_t q = 0; q < order.size(); ++q) {
      const int d = order[q];
      const std::span<const double> row(table.data() + static_cast<std::size_t>(std::abs(d)) * S, S);
      const cplx s = kernels::dot(row, std::span<const cplx>(g[field[q]]));
      // J_{-d} = (-1)^d J_d
      out[q][k] = kTwoPi * i_pow(d) * (d < 0 ? sign_pow(d) : 1.0) * s;
    }
  });
  return out;
}

quad::Rule nu_rule(double a, double b, const OpticalConfig& cfg) {
  // one 30-point panel per half focal-spot width
  const double spot = 1.0 / (kPi * cfg.waist);
  const int panels = std::max(1, static_cast<int>(std::ceil(2.0 * (b - a) / spot)));
  return quad::gauss_legendre(a, b, panels);
}

// The analyzer-plane field carries the Fresnel chirp out to rMax, whose local
// spatial frequency is rMax / (lambda z); add a few focal-spot widths.
double full_plane_nu(const OpticalConfig& cfg, int dmax) {
  return cfg.rMax() / (cfg.wavelength * cfg.distance) +
         (6.0 + 1.5 * std::sqrt(static_cast<double>(dmax))) / (kPi * cfg.waist);
}

}  // namespace

// ---------------------------------------------------------------------------

double OpticalConfig::k() const { return kTwoPi / wavelength; }
cplx OpticalConfig::alpha() const { return {1.0 / (waist * waist), k() / (2.0 * distance)}; }
double OpticalConfig::beta() const { return k() / distance; }
cplx OpticalConfig::Q() const { return beta() * beta() / (8.0 * alpha()); }
cplx OpticalConfig::h0() const { return {0.0, 1.0 / (wavelength * distance)}; }
double OpticalConfig::u0() const { return std::sqrt(2.0 / (kPi * waist * waist)); }
double OpticalConfig::beam_radius() const {
  const double zR = kPi * waist * waist / wavelength;
  return waist * std::sqrt(1.0 + (distance / zR) * (distance / zR));
}
double OpticalConfig::rMax() const { return rMaxFactor * beam_radius(); }
double OpticalConfig::nu0() const { return aperture / (wavelength * focal); }

void OpticalConfig::validate() const {
  if (!(wavelength > 0.0 && waist > 0.0 && focal > 0.0 && aperture > 0.0)) {
    throw std::invalid_argument("optical config: lengths must be positive");
  }
  if (!(distance > 0.0)) throw std::invalid_argument("optical config: z must be > 0 (Fresnel kernel singular)");
  if (radialSamples < 64) throw std::invalid_argument("optical config: need at least 64 radial samples");
  if (rMaxFactor < 4.0) throw std::invalid_argument("optical config: rMax must be at least 4 beam radii");
  if (helicityLo > helicityHi || modeMargin < 0) throw std::invalid_argument("optical config: bad helicity range");
}

double MaskSpectrum::total_power() const {
  double s = 0.0;
  for (const auto& v : a) s += std::norm(v);
  return s;
}

double RadialField::power() const {
  std::vector<double> rw(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) rw[j] = w[j] * r[j];
  return kTwoPi * kernels::weighted_norm2(rw, u);
}

// ---------------------------------------------------------------------------

MaskSpectrum mask_spectrum(const std::vector<cplx>& maskSamples, int M) {
  const std::size_t N = maskSamples.size();
  if (M < 0 || N < 2 * static_cast<std::size_t>(M) + 1) throw std::invalid_argument("mask_spectrum: too few samples");
  for (const auto& t : maskSamples) {
    if (std::abs(t) > 1.0 + 1e-12) throw std::invalid_argument("mask_spectrum: |t_A| must not exceed 1");
  }
  std::vector<cplx> spec;
  Eigen::FFT<double> fft;
  fft.fwd(spec, maskSamples);
  MaskSpectrum ms;
  ms.M = M;
  ms.a.resize(2 * static_cast<std::size_t>(M) + 1);
  const long n = static_cast<long>(N);
  for (int m = -M; m <= M; ++m) {
    ms.a[static_cast<std::size_t>(m + M)] = spec[static_cast<std::size_t>(((m % n) + n) % n)] / static_cast<double>(N);
  }
  return ms;
}

MaskSpectrum mask_from_state(const MomentumWavefunction& state) {
  const int M = state.truncation();
  std::size_t N = 1024;
  while (N < 16 * (2 * static_cast<std::size_t>(M) + 1)) N <<= 1;
  const auto s = synthesize(state, N);
  double peak = 0.0;
  for (const auto& v : s.values) peak = std::max(peak, std::abs(v));
  // t_A(phi) = c sqrt(2 pi) Psi(-phi)
  const double c = 1.0 / (std::sqrt(kTwoPi) * peak);
  MaskSpectrum ms;
  ms.M = M;
  ms.a = state.coefficients();
  for (auto& v : ms.a) v *= c;
  return ms;
}

// ---------------------------------------------------------------------------

std::vector<cplx> A_closed_form(int m, const std::vector<double>& r, const OpticalConfig& cfg) {
  const cplx alpha = cfg.alpha();
  const cplx Q = cfg.Q();
  const double beta = cfg.beta();
  const int am = std::abs(m);
  const double parity = m < 0 ? sign_pow(m) : 1.0;
  const cplx pref = (Q / beta) * std::sqrt(kPi / alpha);
  std::vector<cplx> out(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) {
    const double rr = r[j];
    if (rr == 0.0) {
      out[j] = am == 0 ? 1.0 / (2.0 * alpha) : cplx(0.0);
      continue;
    }
    const cplx z = Q * rr * rr;
    cplx bracket;
    if (am % 2 == 0) {
      // orders (m-1)/2 = k - 1/2 and (m+1)/2 = k + 1/2 with k = m/2
      const int k = am / 2;
      const auto h = special::bessel_i_half_scaled(z, k + 1);
      bracket = h[static_cast<std::size_t>(k)] - h[static_cast<std::size_t>(k + 1)];
    } else {
      const int n1 = (am - 1) / 2;
      const auto I = special::bessel_i_scaled(z, n1 + 1);
      bracket = I[static_cast<std::size_t>(n1)] - I[static_cast<std::size_t>(n1 + 1)];
    }
    out[j] = parity * rr * pref * bracket;
  }
  return out;
}

cplx A_closed_form(int m, double r, const OpticalConfig& cfg) { return A_closed_form(m, std::vector<double>{r}, cfg)[0]; }

cplx A_quadrature(int m, double r, const OpticalConfig& cfg) {
  const cplx alpha = cfg.alpha();
  const double beta = cfg.beta();
  const int am = std::abs(m);
  const double parity = m < 0 ? sign_pow(m) : 1.0;
  const double rcut = std::sqrt(55.0 / alpha.real());
  auto f = [&](double rp) -> cplx {
    return std::exp(-alpha * rp * rp) * std::cyl_bessel_j(static_cast<double>(am), beta * r * rp) * rp;
  };
  // one Kronrod panel per half-oscillation of the integrand; an adaptive
  // relative tolerance is unreachable because of the cancellation
  const double phase = beta * r * rcut + alpha.imag() * rcut * rcut;
  const int pieces = std::max(16, static_cast<int>(std::ceil(phase / kPi)));
  cplx total = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double a = rcut * p / pieces, b = rcut * (p + 1) / pieces;
    total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 4, 1e-12);
  }
  return parity * total;
}

quad::Rule radial_rule(const OpticalConfig& cfg) {
  const int panels = std::max(2, (cfg.radialSamples + 29) / 30);
  return quad::gauss_legendre(0.0, cfg.rMax(), panels);
}

RadialField propagate_mode(int m, const OpticalConfig& cfg, PropagationMethod method) {
  cfg.validate();
  const auto rule = radial_rule(cfg);
  RadialField f;
  f.m = m;
  f.r = rule.x;
  f.w = rule.w;
  std::vector<cplx> A;
  if (method == PropagationMethod::closedForm) {
    A = A_closed_form(m, f.r, cfg);
  } else {
    A.resize(f.r.size());
    parallel_for(f.r.size(), [&](std::size_t j) { A[j] = A_quadrature(m, f.r[j], cfg); });
  }
  const cplx pref = kTwoPi * cfg.u0() * i_pow(m) * cfg.h0();
  const double k = cfg.k();
  f.u.resize(A.size());
  for (std::size_t j = 0; j < A.size(); ++j) {
    f.u[j] = pref * std::polar(1.0, -k * f.r[j] * f.r[j] / (2.0 * cfg.distance)) * A[j];
  }
  return f;
}

std::vector<RadialField> propagate(const MaskSpectrum& mask, const OpticalConfig& cfg, PropagationMethod method,
                                   bool allModes) {
  cfg.validate();
  std::vector<int> ms;
  for (int m = cfg.mode_lo(); m <= cfg.mode_hi(); ++m) {
    if (allModes || std::abs(mask[m]) > 0.0) ms.push_back(m);
  }
  std::vector<RadialField> out(ms.size());
  if (method == PropagationMethod::closedForm) {
    parallel_for(ms.size(), [&](std::size_t i) { out[i] = propagate_mode(ms[i], cfg, method); });
  } else {
    for (std::size_t i = 0; i < ms.size(); ++i) out[i] = propagate_mode(ms[i], cfg, method);
  }
  return out;
}

std::vector<cplx> hankel(const RadialField& f, int d, const std::vector<double>& nu) {
  const auto t = focal_transforms({hankel_weights(f)}, f.r, {d}, {0}, nu);
  return t[0];
}

// ---------------------------------------------------------------------------

const std::vector<cplx>& FocalDecomposition::ubarN() const { return vbar(N); }

const std::vector<cplx>& FocalDecomposition::vbar(int m) const {
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i] == m) return fields[i];
  }
  throw std::out_of_range("FocalDecomposition: helicity not present");
}

FocalDecomposition analyzer_field(const std::vector<RadialField>& fields, int N, const OpticalConfig& cfg,
                                  double nuMax) {
  cfg.validate();
  if (fields.empty()) throw std::invalid_argument("analyzer_field: no propagated fields");
  FocalDecomposition dec;
  dec.N = N;
  dec.nu0 = cfg.nu0();
  int dmax = 0;
  for (const auto& f : fields) dmax = std::max(dmax, std::abs(f.m - N));
  dec.nuMax = nuMax > 0.0 ? nuMax : full_plane_nu(cfg, dmax);
  if (dec.nuMax < dec.nu0) dec.nuMax = dec.nu0;
  const auto inner = nu_rule(0.0, dec.nu0, cfg);
  dec.innerCount = inner.x.size();
  dec.nu = dec.nuMax > dec.nu0 ? quad::join(inner, nu_rule(dec.nu0, dec.nuMax, cfg)) : inner;

  std::vector<std::vector<cplx>> g;
  std::vector<int> order;
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    g.push_back(hankel_weights(fields[i]));
    order.push_back(fields[i].m - N);
    idx.push_back(i);
    dec.modes.push_back(fields[i].m);
  }
  dec.fields = focal_transforms(g, fields.front().r, order, idx, dec.nu.x);
  return dec;
}

DetectedPower detected_power(const FocalDecomposition& dec, const MaskSpectrum& mask, const OpticalConfig& cfg,
                             bool fullPlane) {
  const double nu0 = cfg.nu0();
  if (nu0 > dec.nuMax * (1.0 + 1e-12)) throw std::invalid_argument("detected_power: aperture exceeds computed grid");
  if (!fullPlane && std::abs(nu0 - dec.nu0) > 1e-9 * dec.nu0) {
    throw std::invalid_argument("detected_power: aperture differs from the decomposition cut-off");
  }
  const std::size_t count = fullPlane ? dec.nu.x.size() : dec.innerCount;
  DetectedPower p;
  for (std::size_t i = 0; i < dec.modes.size(); ++i) {
    const int m = dec.modes[i];
    const double a2 = std::norm(mask[m]);
    if (a2 == 0.0) continue;
    double s = 0.0;
    for (std::size_t k = 0; k < count; ++k) s += dec.nu.w[k] * dec.nu.x[k] * std::norm(dec.fields[i][k]);
    s *= kTwoPi * a2;
    if (m == dec.N) {
      p.signal += s;
    } else {
      p.crosstalk += s;
    }
  }
  return p;
}

// ---------------------------------------------------------------------------

double ResponseMatrix::at(int N, int m) const {
  if (N < nLo || N > nHi || m < mLo || m > mHi) throw std::out_of_range("ResponseMatrix: index outside matrix");
  return C[static_cast<std::size_t>(N - nLo) * static_cast<std::size_t>(cols()) + static_cast<std::size_t>(m - mLo)];
}

double ResponseMatrix::dominance(int N, int colLo, int colHi) const {
  double off = 0.0;
  for (int m = std::max(colLo, mLo); m <= std::min(colHi, mHi); ++m) {
    if (m != N) off += at(N, m);
  }
  return at(N, N) / off;
}

std::vector<std::vector<double>> captured_power(const OpticalConfig& cfg, const std::vector<PowerRequest>& req,
                                                const std::vector<double>& nuBreaks) {
  cfg.validate();
  for (std::size_t b = 0; b < nuBreaks.size(); ++b) {
    if (!(nuBreaks[b] > 0.0) || (b > 0 && nuBreaks[b] <= nuBreaks[b - 1])) {
      throw std::invalid_argument("captured_power: cut-offs must be positive and increasing");
    }
  }
  // fields depend on |m| only: u_{-m} = u_m
  std::vector<int> absm;
  for (const auto& r : req) absm.push_back(std::abs(r.m));
  std::sort(absm.begin(), absm.end());
  absm.erase(std::unique(absm.begin(), absm.end()), absm.end());
  std::vector<RadialField> fields(absm.size());
  parallel_for(absm.size(), [&](std::size_t i) { fields[i] = propagate_mode(absm[i], cfg); });
  std::vector<std::vector<cplx>> g(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) g[i] = hankel_weights(fields[i]);

  // one transform per distinct (|m|, |d|)
  std::vector<std::pair<int, int>> keys;
  for (const auto& r : req) keys.emplace_back(std::abs(r.m), std::abs(r.d));
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  std::vector<int> order;
  std::vector<std::size_t> field;
  for (const auto& [m, d] : keys) {
    order.push_back(d);
    field.push_back(static_cast<std::size_t>(std::lower_bound(absm.begin(), absm.end(), m) - absm.begin()));
  }

  quad::Rule rule;
  std::vector<std::size_t> ends;
  double lo = 0.0;
  for (double b : nuBreaks) {
    rule = quad::join(rule, nu_rule(lo, b, cfg));
    ends.push_back(rule.x.size());
    lo = b;
  }
  const auto T = focal_transforms(g, fields.front().r, order, field, rule.x);

  std::vector<std::vector<double>> keyPower(nuBreaks.size(), std::vector<double>(keys.size(), 0.0));
  for (std::size_t q = 0; q < keys.size(); ++q) {
    double acc = 0.0;
    std::size_t k = 0;
    for (std::size_t b = 0; b < ends.size(); ++b) {
      for (; k < ends[b]; ++k) acc += rule.w[k] * rule.x[k] * std::norm(T[q][k]);
      keyPower[b][q] = kTwoPi * acc;
    }
  }
  std::vector<std::vector<double>> out(nuBreaks.size(), std::vector<double>(req.size()));
  for (std::size_t i = 0; i < req.size(); ++i) {
    const auto key = std::make_pair(std::abs(req[i].m), std::abs(req[i].d));
    const auto q = static_cast<std::size_t>(std::lower_bound(keys.begin(), keys.end(), key) - keys.begin());
    for (std::size_t b = 0; b < nuBreaks.size(); ++b) out[b][i] = keyPower[b][q];
  }
  return out;
}

ResponseMatrix response_matrix(const OpticalConfig& cfg) {
  return response_matrix(cfg, cfg.helicityLo, cfg.helicityHi, cfg.mode_lo(), cfg.mode_hi());
}

ResponseMatrix response_matrix(const OpticalConfig& cfg, int nLo, int nHi, int mLo, int mHi) {
  if (nHi < nLo || mHi < mLo) throw std::invalid_argument("response_matrix: empty range");
  ResponseMatrix R;
  R.nLo = nLo;
  R.nHi = nHi;
  R.mLo = mLo;
  R.mHi = mHi;
  std::vector<PowerRequest> req;
  for (int N = nLo; N <= nHi; ++N) {
    for (int m = mLo; m <= mHi; ++m) req.push_back({m, m - N});
  }
  const auto P = captured_power(cfg, req, {cfg.nu0()});
  R.C = P[0];
  return R;
}

// ---------------------------------------------------------------------------

MeasuredSpectrum simulate_spectrum(const MaskSpectrum& mask, const ResponseMatrix& C, const NoiseModel& noise) {
  if (noise.relativeLevel < 0.0) throw std::invalid_argument("simulate_spectrum: noise level must be >= 0");
  MeasuredSpectrum s;
  s.nLo = C.nLo;
  s.nHi = C.nHi;
  s.power.assign(static_cast<std::size_t>(C.rows()), 0.0);
  for (int N = C.nLo; N <= C.nHi; ++N) {
    double p = 0.0;
    for (int m = C.mLo; m <= C.mHi; ++m) p += C.at(N, m) * std::norm(mask[m]);
    s.power[static_cast<std::size_t>(N - C.nLo)] = p;
  }
  if (noise.relativeLevel > 0.0) {
    std::mt19937_64 gen(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& p : s.power) p = std::max(0.0, p * (1.0 + noise.relativeLevel * gauss(gen)));
  }
  return s;
}

MeasuredSpectrum simulate_spectrum(const MaskSpectrum& mask, const OpticalConfig& cfg, const NoiseModel& noise) {
  return simulate_spectrum(mask, response_matrix(cfg), noise);
}

MeasuredSpectrum simulate_spectrum(const MomentumWavefunction& state, const OpticalConfig& cfg,
                                   const NoiseModel& noise) {
  return simulate_spectrum(mask_from_state(state), cfg, noise);
}

// ---------------------------------------------------------------------------

std::vector<double> default_aperture_grid(int points) {
  if (points < 3) throw std::invalid_argument("default_aperture_grid: need at least 3 points");
  std::vector<double> g(static_cast<std::size_t>(points));
  const double lo = std::log(2e-6), hi = std::log(200e-6);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = std::exp(lo + (hi - lo) * i / (points - 1));
  return g;
}

ApertureScan optimize_aperture(const OpticalConfig& cfg, const std::vector<int>& modeSet,
                               const std::vector<double>& rGrid) {
  if (modeSet.empty()) throw std::invalid_argument("optimize_aperture: empty mode set");
  if (rGrid.size() < 3) throw std::invalid_argument("optimize_aperture: degenerate radius grid");
  for (std::size_t i = 0; i < rGrid.size(); ++i) {
    if (!(rGrid[i] > 0.0) || (i > 0 && rGrid[i] <= rGrid[i - 1])) {
      throw std::invalid_argument("optimize_aperture: radii must be positive and strictly increasing");
    }
  }
  std::vector<PowerRequest> req;
  for (int N : modeSet) {
    for (int m : modeSet) req.push_back({m, m - N});
  }
  std::vector<double> breaks(rGrid.size());
  for (std::size_t i = 0; i < rGrid.size(); ++i) breaks[i] = rGrid[i] / (cfg.wavelength * cfg.focal);
  const auto P = captured_power(cfg, req, breaks);

  ApertureScan scan;
  scan.radius = rGrid;
  for (std::size_t b = 0; b < rGrid.size(); ++b) {
    double loss = 0.0, cross = 0.0;
    std::size_t i = 0;
    for (int N : modeSet) {
      for (int m : modeSet) {
        if (m == N) {
          loss += 1.0 - P[b][i];
        } else {
          cross += P[b][i];
        }
        ++i;
      }
    }
    scan.loss.push_back(loss);
    scan.crosstalk.push_back(cross);
    scan.objective.push_back(loss + cross);
  }
  scan.best = static_cast<std::size_t>(std::min_element(scan.objective.begin(), scan.objective.end()) -
                                       scan.objective.begin());
  return scan;
}

}  // namespace orbita::optics
