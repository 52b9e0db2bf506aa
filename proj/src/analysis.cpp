#include "orbita/analysis.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>

#include "orbita/mathieu.hpp"
#include "orbita/parallel.hpp"

namespace orbita::analysis {

namespace {

// Floor of the normalized model in the fit weights. Deconvolved tails carry
// noise near 1e-4 of the total power at percent-level detector noise; a lower
// floor lets that noise dominate the fit and biases sharp spectra wide.
constexpr double kWeightFloor = 1e-4;
constexpr int kScanPoints = 64;
constexpr int kPipelineTruncation = 128;

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Eigen::MatrixXd window_matrix(const optics::ResponseMatrix& R, int lo, int hi) {
  Eigen::MatrixXd C(hi - lo + 1, hi - lo + 1);
  for (int N = lo; N <= hi; ++N) {
    for (int m = lo; m <= hi; ++m) C(N - lo, m - lo) = R.at(N, m);
  }
  return C;
}

// Projected gradient with Nesterov momentum and adaptive restart, then an
// exact least-squares solve on the detected support.
Eigen::VectorXd nnls_tikhonov(const Eigen::MatrixXd& C, const Eigen::VectorXd& y, double lambda) {
  const Eigen::Index n = C.cols();
  const Eigen::MatrixXd H = C.transpose() * C + lambda * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd b = C.transpose() * y;
  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n), xPrev = x, z = x;
  double t = 1.0;
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-300);
  for (int it = 0; it < 200000; ++it) {
    const Eigen::VectorXd g = H * z - b;
    xPrev = x;
    x = (z - g / L).cwiseMax(0.0);
    const double tNext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    if ((x - xPrev).dot(z - x) > 0.0) {
      t = 1.0;  // restart
      z = x;
    } else {
      z = x + ((t - 1.0) / tNext) * (x - xPrev);
      t = tNext;
    }
    if ((x - xPrev).cwiseAbs().maxCoeff() <= 1e-15 * std::max(x.cwiseAbs().maxCoeff(), 1e-300) && it > 10) break;
  }

  // polish: solve on the support and keep it if it stays feasible and KKT holds
  std::vector<Eigen::Index> free;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (x[i] > 0.0) free.push_back(i);
  }
  if (free.empty()) return x;
  const auto k = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd Hf(k, k);
  Eigen::VectorXd bf(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    bf[i] = b[free[i]];
    for (Eigen::Index j = 0; j < k; ++j) Hf(i, j) = H(free[i], free[j]);
  }
  const Eigen::VectorXd xf = Hf.ldlt().solve(bf);
  if ((xf.array() <= 0.0).any()) return x;
  Eigen::VectorXd cand = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < k; ++i) cand[free[i]] = xf[i];
  const Eigen::VectorXd grad = H * cand - b;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (cand[i] == 0.0 && grad[i] < -1e-10 * scale) return x;
  }
  return cand;
}

std::vector<double> measured_window(const optics::MeasuredSpectrum& s, int lo, int hi) {
  if (lo < s.nLo || hi > s.nHi) throw std::invalid_argument("measured spectrum does not cover the window");
  std::vector<double> y;
  for (int N = lo; N <= hi; ++N) y.push_back(s.at(N));
  return y;
}

void check_cover(const optics::MeasuredSpectrum& measured, const optics::ResponseMatrix& R) {
  if (measured.nLo < R.nLo || measured.nHi > R.nHi || measured.nLo < R.mLo || measured.nHi > R.mHi) {
    throw std::invalid_argument("deconvolve: response rows/columns must cover the detection window");
  }
}

struct Profiled {
  double objective = 0.0;
  double normalization = 0.0;
};

// min over A of sum w (y - A f)^2 with Poisson-proxy weights w = 1/max(fhat, eps)
// taken from the normalized model fhat; the data may contain exact zeros
// (nonnegativity clipping) that would otherwise carry weight 1/eps.
Profiled profile(const std::vector<double>& y, const std::vector<double>& f) {
  double sf = 0.0;
  for (double v : f) sf += v;
  Profiled p;
  if (!(sf > 0.0) || !std::isfinite(sf)) {
    p.objective = std::numeric_limits<double>::infinity();
    return p;
  }
  double syf = 0.0, sff = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double w = 1.0 / std::max(f[i] / sf, kWeightFloor);
    syf += w * y[i] * f[i];
    sff += w * f[i] * f[i];
    syy += w * y[i] * y[i];
  }
  p.normalization = syf / sff;
  p.objective = std::max(0.0, syy - syf * syf / sff);
  return p;
}

// allowBoundary keeps an optimum on the edge of the parameter range instead of
// throwing; bootstrap replicates of nearly degenerate spectra can land there.
FitResult fit_weighted(const std::vector<double>& yIn, int lo, int hi, FitFamily family, bool allowBoundary = false) {
  // normalize first so the fit is exactly invariant under y -> c y
  double s = 0.0;
  for (double v : yIn) s += v;
  if (!(s > 0.0)) throw std::invalid_argument("fit_family: spectrum has no positive weight");
  std::vector<double> y(yIn.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = yIn[i] / s;
  auto objective = [&](double logParam) {
    return profile(y, model_spectrum(family, std::exp(logParam), lo, hi)).objective;
  };

  const auto [pLo, pHi] = parameter_range(family);
  const double a = std::log(pLo), b = std::log(pHi);
  std::vector<double> grid(kScanPoints), obj(kScanPoints);
  for (int i = 0; i < kScanPoints; ++i) {
    grid[static_cast<std::size_t>(i)] = a + (b - a) * i / (kScanPoints - 1);
    obj[static_cast<std::size_t>(i)] = objective(grid[static_cast<std::size_t>(i)]);
  }
  const auto best = static_cast<std::size_t>(std::min_element(obj.begin(), obj.end()) - obj.begin());
  if (!std::isfinite(obj[best])) {
    std::vector<double> params(grid.size());
    std::transform(grid.begin(), grid.end(), params.begin(), [](double g) { return std::exp(g); });
    throw FitError("fit_family: objective is not finite anywhere on the parameter scan", params, obj);
  }
  const double lo2 = grid[best == 0 ? 0 : best - 1];
  const double hi2 = grid[std::min(best + 1, grid.size() - 1)];
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::brent_find_minima(objective, lo2, hi2, 52, iters);
  const double edge = (b - a) / (kScanPoints - 1) * 1e-3;
  if (!allowBoundary && (r.first <= a + edge || r.first >= b - edge)) {
    std::vector<double> params(grid.size());
    std::transform(grid.begin(), grid.end(), params.begin(), [](double g) { return std::exp(g); });
    std::ostringstream msg;
    msg << "fit_family: " << to_string(family) << " optimum at the parameter boundary (" << std::exp(r.first)
        << "); scan minimum " << obj[best] << " at " << params[best];
    throw FitError(msg.str(), params, obj);
  }

  FitResult fit;
  fit.family = family;
  fit.widthParam = std::exp(r.first);
  fit.mLo = lo;
  fit.mHi = hi;
  const auto f = model_spectrum(family, fit.widthParam, lo, hi);
  const auto prof = profile(y, f);
  fit.normalization = prof.normalization * s;
  fit.residualNorm = std::sqrt(prof.objective);
  fit.fitted.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) fit.fitted[i] = prof.normalization * f[i];
  const auto th = theory(family, fit.widthParam, lo, hi);
  fit.varE = std::clamp(th.varE, 0.0, 1.0);
  fit.varL = th.varL;
  fit.product = std::sqrt(fit.varE * fit.varL);
  return fit;
}

double state_varE(FitFamily f, double p) {
  if (f == FitFamily::mathieu) return mathieu::mode_uncertainties(mathieu::solve_mode(p, 0)).varE;
  const auto sf = to_state_family(f);
  const double cf = states::closed_form_varE(sf, p);
  return std::isfinite(cf) ? cf : states::quadrature_varE(sf, p);
}

MomentumWavefunction scenario_state(FitFamily f, double p) {
  if (f == FitFamily::mathieu) return mathieu::to_wavefunction(mathieu::solve_mode(p, 0));
  states::StateParams sp;
  sp.width = p;
  sp.truncation = kPipelineTruncation;
  return states::make_state(to_state_family(f), sp).state;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view to_string(FitFamily f) {
  if (f == FitFamily::mathieu) return "mathieu";
  return states::to_string(to_state_family(f));
}

FitFamily fit_family_from_string(std::string_view s) {
  if (lower(s) == "mathieu") return FitFamily::mathieu;
  switch (states::family_from_string(s)) {
    case states::Family::wedge:
      return FitFamily::wedge;
    case states::Family::cosine:
      return FitFamily::cosine;
    case states::Family::vonMises:
      return FitFamily::vonMises;
    case states::Family::truncatedGaussian:
      return FitFamily::truncatedGaussian;
    case states::Family::wrappedGaussian:
      return FitFamily::wrappedGaussian;
    case states::Family::coherent:
      break;
  }
  throw std::invalid_argument("family '" + std::string(s) + "' has no one-parameter spectrum model");
}

states::Family to_state_family(FitFamily f) {
  switch (f) {
    case FitFamily::wedge:
      return states::Family::wedge;
    case FitFamily::cosine:
      return states::Family::cosine;
    case FitFamily::vonMises:
      return states::Family::vonMises;
    case FitFamily::truncatedGaussian:
      return states::Family::truncatedGaussian;
    case FitFamily::wrappedGaussian:
      return states::Family::wrappedGaussian;
    case FitFamily::mathieu:
      break;
  }
  throw std::invalid_argument("mathieu beams are not a states family");
}

std::pair<double, double> parameter_range(FitFamily f) {
  switch (f) {
    case FitFamily::wedge:
      return {0.02, 2.0 * std::numbers::pi};
    case FitFamily::cosine:
      return {0.02, 16.0};
    case FitFamily::vonMises:
      return {1e-3, 50.0};
    case FitFamily::truncatedGaussian:
      return {0.02, 30.0};
    case FitFamily::wrappedGaussian:
      return {0.01, 5.0};
    case FitFamily::mathieu:
      return {1e-4, 1e5};
  }
  throw std::logic_error("unreachable");
}

std::vector<double> model_spectrum(FitFamily f, double param, int lo, int hi) {
  if (hi < lo) throw std::invalid_argument("model_spectrum: empty window");
  std::vector<double> p(static_cast<std::size_t>(hi - lo + 1));
  if (f == FitFamily::mathieu) {
    const int M = std::max(std::abs(lo), std::abs(hi));
    const auto full = mathieu::fundamental_spectrum(param, M);
    for (int m = lo; m <= hi; ++m) p[static_cast<std::size_t>(m - lo)] = full[static_cast<std::size_t>(m + M)];
    return p;
  }
  if (f == FitFamily::wrappedGaussian) {
    states::StateParams sp;
    sp.width = param;
    sp.truncation = std::max(std::abs(lo), std::abs(hi)) + 16;
    const auto pkg = states::make_state(states::Family::wrappedGaussian, sp);
    for (int m = lo; m <= hi; ++m) p[static_cast<std::size_t>(m - lo)] = std::norm(pkg.state[m]);
    return p;
  }
  states::StateParams sp;
  sp.width = param;
  for (int m = lo; m <= hi; ++m) p[static_cast<std::size_t>(m - lo)] = states::closed_form_pm(to_state_family(f), sp, m);
  return p;
}

TheoryPoint theory(FitFamily f, double param, int lo, int hi) {
  TheoryPoint t;
  if (f == FitFamily::mathieu) {
    const auto u = mathieu::mode_uncertainties(mathieu::solve_mode(param, 0));
    t.varE = u.varE;
    t.varL = u.varL;
  } else if (f == FitFamily::wedge) {
    const auto p = model_spectrum(f, param, lo, hi);
    double s = 0.0, s2 = 0.0;
    for (int m = lo; m <= hi; ++m) {
      s += p[static_cast<std::size_t>(m - lo)];
      s2 += static_cast<double>(m) * m * p[static_cast<std::size_t>(m - lo)];
    }
    t.varE = states::closed_form_varE(states::Family::wedge, param);
    t.varL = s2 / s;
  } else {
    const auto sf = to_state_family(f);
    t.varE = states::closed_form_varE(sf, param);
    t.varL = states::closed_form_varL(sf, param);
    if (!std::isfinite(t.varE) || !std::isfinite(t.varL)) {
      states::StateParams sp;
      sp.width = param;
      const auto r = uncertainty_report(states::make_state(sf, sp).state);
      if (!std::isfinite(t.varE)) t.varE = r.varE;
      if (!std::isfinite(t.varL)) t.varL = r.varL;
    }
  }
  t.product = std::sqrt(t.varE * t.varL);
  return t;
}

double width_for_variance(FitFamily f, double varE) {
  if (!(varE > 0.0 && varE < 1.0)) throw std::invalid_argument("width_for_variance: need 0 < varE < 1");
  if (f == FitFamily::mathieu) return mathieu::q_for_variance(varE, 0);
  const auto [pLo, pHi] = parameter_range(f);
  auto g = [&](double lp) { return state_varE(f, std::exp(lp)) - varE; };
  const double a = std::log(pLo), b = std::log(pHi);
  const double ga = g(a), gb = g(b);
  if (ga * gb > 0.0) throw std::domain_error("width_for_variance: varE not reachable by this family");
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(g, a, b, ga, gb, boost::math::tools::eps_tolerance<double>(50),
                                                   iters);
  return std::exp(0.5 * (r.first + r.second));
}

// ---------------------------------------------------------------------------

RecoveredSpectrum deconvolve(const optics::MeasuredSpectrum& measured, const optics::ResponseMatrix& response,
                             double regularization) {
  if (!(regularization >= 0.0)) throw std::invalid_argument("deconvolve: regularization must be >= 0");
  check_cover(measured, response);
  const int lo = measured.nLo, hi = measured.nHi;
  const Eigen::MatrixXd C = window_matrix(response, lo, hi);
  if (regularization == 0.0) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
    const auto& sv = svd.singularValues();
    const double cond = sv.minCoeff() > 0.0 ? sv.maxCoeff() / sv.minCoeff() : std::numeric_limits<double>::infinity();
    if (cond > 1e12) {
      std::ostringstream msg;
      msg << "deconvolve: response matrix is ill-conditioned (cond " << cond << "); use a nonzero regularization";
      throw std::domain_error(msg.str());
    }
  }
  const auto yv = measured_window(measured, lo, hi);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), static_cast<Eigen::Index>(yv.size()));
  const Eigen::VectorXd x = nnls_tikhonov(C, y, regularization);
  const double s = x.sum();
  if (!(s > 0.0)) throw std::runtime_error("deconvolve: recovered spectrum vanishes");
  RecoveredSpectrum r;
  r.mLo = lo;
  r.mHi = hi;
  r.regularization = regularization;
  r.measured = measured;
  r.response = std::make_shared<const optics::ResponseMatrix>(response);
  r.p.resize(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) r.p[static_cast<std::size_t>(i)] = x[i] / s;
  return r;
}

LCurve l_curve(const optics::MeasuredSpectrum& measured, const optics::ResponseMatrix& response, int points) {
  if (points < 5) throw std::invalid_argument("l_curve: need at least 5 points");
  check_cover(measured, response);
  const int lo = measured.nLo, hi = measured.nHi;
  const Eigen::MatrixXd C = window_matrix(response, lo, hi);
  const auto yv = measured_window(measured, lo, hi);
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(yv.data(), static_cast<Eigen::Index>(yv.size()));
  const double s2 = Eigen::JacobiSVD<Eigen::MatrixXd>(C).singularValues().maxCoeff();
  const double scale = s2 * s2;

  LCurve lc;
  lc.lambda.resize(static_cast<std::size_t>(points));
  lc.residualNorm.resize(lc.lambda.size());
  lc.solutionNorm.resize(lc.lambda.size());
  lc.curvature.assign(lc.lambda.size(), 0.0);
  parallel_for(lc.lambda.size(), [&](std::size_t i) {
    const double t = -12.0 + 12.0 * static_cast<double>(i) / (points - 1);
    const double lam = scale * std::pow(10.0, t);
    const Eigen::VectorXd x = nnls_tikhonov(C, y, lam);
    lc.lambda[i] = lam;
    lc.residualNorm[i] = std::max((C * x - y).norm(), 1e-300);
    lc.solutionNorm[i] = std::max(x.norm(), 1e-300);
  });
  double best = -std::numeric_limits<double>::infinity();
  lc.corner = lc.lambda.size() / 2;
  for (std::size_t i = 1; i + 1 < lc.lambda.size(); ++i) {
    const double x0 = std::log(lc.residualNorm[i - 1]), y0 = std::log(lc.solutionNorm[i - 1]);
    const double x1 = std::log(lc.residualNorm[i]), y1 = std::log(lc.solutionNorm[i]);
    const double x2 = std::log(lc.residualNorm[i + 1]), y2 = std::log(lc.solutionNorm[i + 1]);
    const double cross = (x1 - x0) * (y2 - y1) - (y1 - y0) * (x2 - x1);
    const double d = std::hypot(x1 - x0, y1 - y0) * std::hypot(x2 - x1, y2 - y1) * std::hypot(x2 - x0, y2 - y0);
    lc.curvature[i] = d > 0.0 ? 2.0 * cross / d : 0.0;
    if (lc.curvature[i] > best) {
      best = lc.curvature[i];
      lc.corner = i;
    }
  }
  return lc;
}

// ---------------------------------------------------------------------------

FitResult fit_family(const RecoveredSpectrum& recovered, FitFamily family) {
  if (recovered.p.size() != static_cast<std::size_t>(recovered.mHi - recovered.mLo + 1)) {
    throw std::invalid_argument("fit_family: spectrum size does not match its window");
  }
  return fit_weighted(recovered.p, recovered.mLo, recovered.mHi, family);
}

FitResult uncertainty_with_errors(const FitResult& fit, const RecoveredSpectrum& recovered, int bootstrapCount,
                                  std::uint64_t seed) {
  if (bootstrapCount < 2) throw std::invalid_argument("uncertainty_with_errors: need at least 2 resamples");
  const std::size_t n = recovered.p.size();
  if (fit.fitted.size() != n) throw std::invalid_argument("uncertainty_with_errors: fit and spectrum windows differ");

  // Residuals live where the noise enters: in the measured powers when the
  // spectrum carries its measurement, otherwise in the recovered spectrum.
  const bool measuredSpace = recovered.measured.has_value() && recovered.response != nullptr;
  std::vector<double> base, scale, res;
  Eigen::MatrixXd C;
  if (measuredSpace) {
    const auto& meas = *recovered.measured;
    C = window_matrix(*recovered.response, recovered.mLo, recovered.mHi);
    const Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(fit.fitted.data(), static_cast<Eigen::Index>(n));
    const Eigen::VectorXd yhat = C * p;
    const auto y = measured_window(meas, recovered.mLo, recovered.mHi);
    const double kappa = std::accumulate(y.begin(), y.end(), 0.0) / yhat.sum();
    // relative residuals: the declared detector noise is multiplicative
    for (std::size_t i = 0; i < n; ++i) {
      const double b = kappa * yhat[static_cast<Eigen::Index>(i)];
      base.push_back(b);
      scale.push_back(b);
      res.push_back(b > 1e-300 ? (y[i] - b) / b : 0.0);
    }
  } else {
    double s = 0.0, sf = 0.0;
    for (double v : recovered.p) s += v;
    for (double v : fit.fitted) sf += v;
    for (std::size_t i = 0; i < n; ++i) {
      const double sd = std::sqrt(std::max(fit.fitted[i] / sf, kWeightFloor));
      base.push_back(fit.fitted[i]);
      scale.push_back(sd);
      res.push_back((recovered.p[i] / s - fit.fitted[i]) / sd);
    }
  }
  // Pool residuals from bins holding at least 1e-4 of the power. Far below the
  // peak the relative residual measures crosstalk from modes outside the
  // window, not detector noise, and resampling it onto the peak is meaningless.
  // The pool is small, so residuals get the usual sqrt(n / (n - p)) leverage
  // correction for the two fitted parameters.
  std::vector<double> pool;
  {
    const double total = std::accumulate(base.begin(), base.end(), 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return base[a] > base[b]; });
    for (std::size_t k = 0; k < n; ++k) {
      if (base[order[k]] >= 1e-4 * total || pool.size() < std::min<std::size_t>(3, n)) pool.push_back(res[order[k]]);
    }
  }
  const double mean = std::accumulate(pool.begin(), pool.end(), 0.0) / static_cast<double>(pool.size());
  if (pool.size() > 2) {
    const double inflate = std::sqrt(static_cast<double>(pool.size()) / static_cast<double>(pool.size() - 2));
    for (auto& r : pool) r = mean + (r - mean) * inflate;
  }

  std::vector<double> products(static_cast<std::size_t>(bootstrapCount));
  parallel_for(products.size(), [&](std::size_t b) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(b)};
    std::mt19937_64 gen(seq);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = std::max(0.0, base[i] + (pool[pick(gen)] - mean) * scale[i]);
    if (measuredSpace) {
      const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
      const Eigen::VectorXd x = nnls_tikhonov(C, yv, recovered.regularization);
      y.assign(x.data(), x.data() + x.size());
    }
    products[b] = fit_weighted(y, recovered.mLo, recovered.mHi, fit.family, true).product;
  });
  const double m = std::accumulate(products.begin(), products.end(), 0.0) / static_cast<double>(products.size());
  double v = 0.0;
  for (double p : products) v += (p - m) * (p - m);
  FitResult out = fit;
  out.errorBars = std::sqrt(v / static_cast<double>(products.size() - 1));
  return out;
}

// ---------------------------------------------------------------------------

StateRun run_state(const ScenarioState& s, const Scenario& sc, const optics::ResponseMatrix& response,
                   std::uint64_t noiseSeed) {
  StateRun run;
  const double width = std::isfinite(s.width) ? s.width : width_for_variance(s.family, s.varE);
  const auto truth = theory(s.family, width, sc.windowLo, sc.windowHi);
  optics::NoiseModel noise = sc.noise;
  noise.seed = noiseSeed;
  const auto full = optics::simulate_spectrum(optics::mask_from_state(scenario_state(s.family, width)), response, noise);
  run.measured.nLo = sc.windowLo;
  run.measured.nHi = sc.windowHi;
  for (int N = sc.windowLo; N <= sc.windowHi; ++N) run.measured.power.push_back(full.at(N));

  const double lambda = sc.regularization >= 0.0 ? sc.regularization : l_curve(run.measured, response).best();
  run.recovered = deconvolve(run.measured, response, lambda);
  run.fit = fit_family(run.recovered, s.family);
  run.fit = uncertainty_with_errors(run.fit, run.recovered, sc.bootstrap, sc.seed ^ noiseSeed);

  auto& row = run.row;
  row.family = std::string(to_string(s.family));
  row.widthParam = width;
  row.varETheory = truth.varE;
  row.productTheory = truth.product;
  row.fittedWidth = run.fit.widthParam;
  row.varERecovered = run.fit.varE;
  row.productRecovered = run.fit.product;
  row.errorBar = run.fit.errorBars;
  row.residualNorm = run.fit.residualNorm;
  row.regularization = lambda;
  return run;
}

PipelineResult run_pipeline(const Scenario& sc) {
  if (sc.states.empty()) throw std::invalid_argument("run_pipeline: no states");
  if (sc.windowHi < sc.windowLo) throw std::invalid_argument("run_pipeline: empty window");
  if (sc.tripleIndex >= sc.states.size()) throw std::invalid_argument("run_pipeline: triple index out of range");
  const auto response = optics::response_matrix(sc.optics, sc.windowLo, sc.windowHi,
                                                sc.windowLo - sc.optics.modeMargin, sc.windowHi + sc.optics.modeMargin);
  PipelineResult out;
  for (std::size_t i = 0; i < sc.states.size(); ++i) {
    const std::uint64_t noiseSeed = sc.noise.seed + 0x9E3779B97F4A7C15ULL * (i + 1);
    const auto run = run_state(sc.states[i], sc, response, noiseSeed);
    out.rows.push_back(run.row);
    if (i == sc.tripleIndex) {
      double raw = 0.0;
      for (double v : run.measured.power) raw += v;
      for (int m = sc.windowLo; m <= sc.windowHi; ++m) {
        const auto k = static_cast<std::size_t>(m - sc.windowLo);
        out.triple.push_back({m, run.measured.power[k] / raw, run.recovered.p[k], run.fit.fitted[k]});
      }
    }
  }
  return out;
}

}  // namespace orbita::analysis
