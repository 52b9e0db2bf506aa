#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "orbita/mathieu.hpp"
#include "orbita/optics.hpp"
#include "orbita/special.hpp"

using namespace orbita;
using namespace orbita::optics;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<cplx> samples(int n, auto f) {
  std::vector<cplx> s(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) s[static_cast<std::size_t>(j)] = f(std::remainder(2.0 * kPi * j / n, 2.0 * kPi));
  return s;
}

MaskSpectrum single_mode(int m, int M = 4) {
  MaskSpectrum s;
  s.M = M;
  s.a.assign(2 * static_cast<std::size_t>(M) + 1, cplx(0.0));
  s.a[static_cast<std::size_t>(m + M)] = 1.0;
  return s;
}

MaskSpectrum modes(const std::vector<std::pair<int, cplx>>& entries, int M = 4) {
  MaskSpectrum s = single_mode(0, M);
  s.a.assign(s.a.size(), cplx(0.0));
  for (const auto& [m, a] : entries) s.a[static_cast<std::size_t>(m + M)] = a;
  return s;
}

double spread(const MeasuredSpectrum& s) {
  double tot = 0.0, mean = 0.0, sq = 0.0;
  for (int N = s.nLo; N <= s.nHi; ++N) {
    tot += s.at(N);
    mean += N * s.at(N);
    sq += double(N) * N * s.at(N);
  }
  mean /= tot;
  return sq / tot - mean * mean;
}

}  // namespace

TEST(Mask, OpenMaskIsPureZeroMode) {
  const auto s = mask_spectrum(samples(256, [](double) { return cplx(1.0); }), 8);
  EXPECT_NEAR(std::abs(s[0]), 1.0, 1e-14);
  for (int m = 1; m <= 8; ++m) {
    EXPECT_LT(std::abs(s[m]), 1e-14);
    EXPECT_LT(std::abs(s[-m]), 1e-14);
  }
}

TEST(Mask, VortexMaskIsSingleMode) {
  const auto s = mask_spectrum(samples(256, [](double p) { return std::polar(1.0, 3.0 * p); }), 8);
  for (int m = -8; m <= 8; ++m) EXPECT_NEAR(std::abs(s[m]), m == 3 ? 1.0 : 0.0, 1e-13) << m;
}

TEST(Mask, WedgeMaskIsSinc) {
  const double alpha = 1.3;
  // midpoint-sampled indicator; its spectrum approaches the sinc as the grid refines
  const int n = 1 << 16;
  const auto s = mask_spectrum(samples(n, [&](double p) { return cplx(std::abs(p) < 0.5 * alpha ? 1.0 : 0.0); }), 12);
  for (int m = -12; m <= 12; ++m) {
    EXPECT_NEAR(s[m].real(), alpha / (2.0 * kPi) * special::sinc(0.5 * m * alpha), 1e-4) << m;
  }
}

TEST(Mask, RejectsTooFewSamples) {
  EXPECT_THROW(mask_spectrum(samples(16, [](double) { return cplx(1.0); }), 8), std::invalid_argument);
}

TEST(Propagation, ClosedFormMatchesQuadrature) {
  OpticalConfig cfg;
  const double w = cfg.beam_radius();
  for (int m = 0; m <= 8; ++m) {
    double peak = 0.0, worst = 0.0;
    for (double r : {0.0, 0.1 * w, 0.3 * w, 0.7 * w, w, 1.5 * w, 2.5 * w}) {
      const cplx a = A_closed_form(m, r, cfg);
      peak = std::max(peak, std::abs(a));
      worst = std::max(worst, std::abs(a - A_quadrature(m, r, cfg)));
    }
    EXPECT_LE(worst, 1e-6 * peak) << m;
  }
}

TEST(Propagation, OnAxisBehaviour) {
  OpticalConfig cfg;
  const auto u0 = propagate_mode(0, cfg);
  const auto u1 = propagate_mode(1, cfg);
  // quadrature nodes are not sorted within a panel
  const auto inner = std::min_element(u0.r.begin(), u0.r.end()) - u0.r.begin();
  const double center = std::abs(A_closed_form(0, 0.0, cfg));
  for (double r : {0.0, 1e-6, 1e-5, 1e-4, 1e-3, 3e-3}) EXPECT_LE(std::abs(A_closed_form(0, r, cfg)), center);
  for (const auto& v : u0.u) EXPECT_LE(std::abs(v), std::abs(u0.u[inner]) * (1.0 + 1e-12));
  EXPECT_EQ(std::abs(A_closed_form(1, 0.0, cfg)), 0.0);
  EXPECT_LT(std::abs(u1.u[inner]), 0.1 * std::abs(u0.u[inner]));
}

TEST(Propagation, ModePowerOnTheGrid) {
  OpticalConfig cfg;
  EXPECT_NEAR(propagate_mode(0, cfg).power(), 1.0, 1e-12);
  // a phase vortex diffracts into a slowly decaying ring; what lies beyond rMax
  // falls off as m^2 / rMax^2
  for (int m : {1, 3, 7}) {
    const double lost = 1.0 - propagate_mode(m, cfg).power();
    cfg.rMaxFactor *= 2.0;
    const double lostWide = 1.0 - propagate_mode(m, cfg).power();
    cfg.rMaxFactor /= 2.0;
    EXPECT_GT(lost, 0.0);
    EXPECT_LT(lost, 1e-4 * m * m);
    EXPECT_NEAR(lost / lostWide, 4.0, 0.1) << m;
  }
}

TEST(Propagation, RefusesZeroDistance) {
  OpticalConfig cfg;
  cfg.distance = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  EXPECT_THROW(propagate_mode(0, cfg), std::invalid_argument);
}

TEST(Analyzer, MismatchedOrdersVanishOnAxis) {
  OpticalConfig cfg;
  const int N = 2;
  for (int m = -3; m <= 6; ++m) {
    const auto f = propagate_mode(m, cfg);
    const auto peak = hankel(f, 0, {0.0});
    const auto onAxis = hankel(f, m - N, {0.0});
    if (m == N) {
      EXPECT_GT(std::abs(onAxis[0]), 0.0);
    } else {
      EXPECT_LE(std::abs(onAxis[0]), 1e-10 * std::abs(peak[0])) << m;
    }
  }
}

TEST(Analyzer, FocalSpotOfGaussianIsGaussian) {
  OpticalConfig cfg;
  const auto dec = analyzer_field(propagate(single_mode(0), cfg), 0, cfg);
  const auto& u = dec.ubarN();
  // log |u| is linear in nu^2
  const double n1 = dec.nu.x[0], n2 = dec.nu.x[dec.innerCount - 1];
  const double slope = (std::log(std::abs(u[dec.innerCount - 1])) - std::log(std::abs(u[0]))) / (n2 * n2 - n1 * n1);
  EXPECT_LT(slope, 0.0);
  for (std::size_t i = 0; i < dec.nu.x.size(); ++i) {
    const double nu = dec.nu.x[i];
    if (std::abs(u[i]) < 1e-6 * std::abs(u[0])) break;
    EXPECT_NEAR(std::log(std::abs(u[i])) - std::log(std::abs(u[0])), slope * (nu * nu - n1 * n1), 1e-6) << nu;
  }
}

TEST(Detection, PureVortexHasNoCrosstalk) {
  OpticalConfig cfg;
  for (int N : {0, 2, -3}) {
    const auto mask = single_mode(N);
    const auto p = detected_power(analyzer_field(propagate(mask, cfg), N, cfg), mask, cfg);
    EXPECT_EQ(p.crosstalk, 0.0) << N;
    EXPECT_GT(p.signal, 0.0);
  }
}

TEST(Detection, FullPlaneConservesPower) {
  OpticalConfig cfg;
  const auto mask = modes({{0, 0.6}, {1, cplx(0.0, 0.5)}, {-2, 0.4}, {3, 0.3}});
  for (int N : {0, 1, 3}) {
    const auto p = detected_power(analyzer_field(propagate(mask, cfg), N, cfg), mask, cfg, true);
    EXPECT_NEAR(p.total() / mask.total_power(), 1.0, 1e-2) << N;
  }
}

TEST(Detection, SmallApertureSuppressesCrosstalk) {
  const auto mask = modes({{0, 0.7}, {1, 0.7}});
  double prev = INFINITY;
  for (double R : {35e-6, 5e-6, 1e-6, 2e-7}) {
    OpticalConfig cfg;
    cfg.aperture = R;
    const auto p = detected_power(analyzer_field(propagate(mask, cfg), 0, cfg), mask, cfg);
    const double ratio = p.crosstalk / p.signal;
    EXPECT_LT(ratio, prev) << R;
    prev = ratio;
  }
  EXPECT_LT(prev, 1e-3);
}

TEST(Response, DominanceFallsWithCharge) {
  OpticalConfig cfg;
  const auto C = response_matrix(cfg);
  double prev = INFINITY;
  for (int N : {0, 1, 2, 5}) {
    const double d = C.dominance(N, C.mLo, C.mHi);
    EXPECT_LT(d, prev) << N;
    prev = d;
  }
  for (int N : {1, 2, 5}) EXPECT_NEAR(C.dominance(N, C.mLo, C.mHi), C.dominance(-N, C.mLo, C.mHi), 1e-9);
}

TEST(Response, ConvergedInRadialSamples) {
  OpticalConfig cfg;
  const auto a = response_matrix(cfg, -2, 2, -4, 4);
  cfg.radialSamples *= 2;
  const auto b = response_matrix(cfg, -2, 2, -4, 4);
  for (int N = -2; N <= 2; ++N) {
    for (int m = -4; m <= 4; ++m) {
      EXPECT_LE(std::abs(a.at(N, m) - b.at(N, m)), 1e-3 * std::max(a.at(N, m), 1e-6 * a.at(N, N))) << N << " " << m;
    }
  }
}

TEST(Response, EntriesArePowerFractions) {
  OpticalConfig cfg;
  const auto C = response_matrix(cfg, -3, 3, -6, 6);
  for (int m = -6; m <= 6; ++m) {
    double col = 0.0;
    for (int N = -3; N <= 3; ++N) {
      EXPECT_GE(C.at(N, m), 0.0);
      col += C.at(N, m);
    }
    EXPECT_LE(col, 1.0 + 1e-9) << m;
  }
}

TEST(Aperture, SingleModePrefersLargestRadius) {
  OpticalConfig cfg;
  const auto grid = default_aperture_grid(21);
  const auto scan = optimize_aperture(cfg, {0}, grid);
  EXPECT_EQ(scan.best, grid.size() - 1);
}

TEST(Aperture, ModeSetHasInteriorOptimum) {
  OpticalConfig cfg;
  const auto grid = default_aperture_grid(41);
  const auto scan = optimize_aperture(cfg, {-2, -1, 0, 1, 2}, grid);
  EXPECT_GT(scan.best, 0u);
  EXPECT_LT(scan.best, grid.size() - 1);
}

TEST(Aperture, HalvingRadiusTradesLossForCrosstalk) {
  OpticalConfig cfg;
  const std::vector<double> grid{10e-6, 20e-6, 40e-6, 80e-6};
  const auto scan = optimize_aperture(cfg, {-2, -1, 0, 1, 2}, grid);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    EXPECT_GT(scan.loss[i - 1], scan.loss[i]);
    EXPECT_LT(scan.crosstalk[i - 1], scan.crosstalk[i]);
  }
  EXPECT_THROW(optimize_aperture(cfg, {0}, {1e-6, 2e-6}), std::invalid_argument);
}

TEST(Simulation, SingleModePeaksAtItsCharge) {
  OpticalConfig cfg;
  const auto s = simulate_spectrum(MomentumWavefunction::basis(2, 4), cfg, NoiseModel{});
  const auto peak = std::max_element(s.power.begin(), s.power.end()) - s.power.begin();
  EXPECT_EQ(s.nLo + static_cast<int>(peak), 2);
}

TEST(Simulation, MathieuSpectraBroadenAsVarianceFalls) {
  OpticalConfig cfg;
  double prev = 0.0;
  for (double varE : {0.9, 0.6, 0.3}) {
    const auto mode = mathieu::solve_mode(mathieu::q_for_variance(varE), 0);
    const double s = spread(simulate_spectrum(mathieu::to_wavefunction(mode), cfg, NoiseModel{}));
    EXPECT_GT(s, prev) << varE;
    prev = s;
  }
}

TEST(Simulation, NoiseIsSeeded) {
  OpticalConfig cfg;
  const auto C = response_matrix(cfg);
  const auto mask = modes({{0, 0.8}, {1, 0.6}});
  const auto a = simulate_spectrum(mask, C, {7, 0.01});
  const auto b = simulate_spectrum(mask, C, {7, 0.01});
  const auto c = simulate_spectrum(mask, C, {8, 0.01});
  const auto clean = simulate_spectrum(mask, C, {7, 0.0});
  EXPECT_EQ(a.power, b.power);
  EXPECT_NE(a.power, c.power);
  for (std::size_t i = 0; i < a.power.size(); ++i) {
    EXPECT_GE(a.power[i], 0.0);
    EXPECT_LE(std::abs(a.power[i] - clean.power[i]), 0.06 * clean.power[i] + 1e-300);
  }
}

TEST(Detection, PowersIgnoreModePhases) {
  OpticalConfig cfg;
  const auto a = modes({{0, 0.6}, {1, 0.5}, {-2, 0.4}, {3, 0.3}});
  const auto b = modes({{0, std::polar(0.6, 1.1)}, {1, std::polar(0.5, -2.0)}, {-2, std::polar(0.4, 0.3)}, {3, -0.3}});
  for (int N : {0, 1}) {
    const auto pa = detected_power(analyzer_field(propagate(a, cfg), N, cfg), a, cfg);
    const auto pb = detected_power(analyzer_field(propagate(b, cfg), N, cfg), b, cfg);
    EXPECT_NEAR(pa.signal, pb.signal, 1e-14);
    EXPECT_NEAR(pa.crosstalk, pb.crosstalk, 1e-14);
  }
}
