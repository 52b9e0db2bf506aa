#include "orbita/mathieu.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "orbita/parallel.hpp"

namespace orbita::mathieu {

namespace {

constexpr int kMaxTruncation = 4096;
constexpr double kTailTolerance = 1e-14;
constexpr double kResidualTolerance = 1e-10;
const double kSqrt2 = std::numbers::sqrt2;

int initial_truncation(double q, int nMax) {
  const double spread = std::sqrt(4.0 * nMax + 1.0) * std::pow(q, 0.25);
  return 32 + 2 * nMax + static_cast<int>(std::ceil(8.0 * spread));
}

struct Tridiagonal {
  Eigen::VectorXd diag;
  Eigen::VectorXd sub;
};

// even: index k = 0..K for {1, sqrt2 cos k phi}; odd: index i = k - 1 for sqrt2 sin k phi
Tridiagonal build(double q, int K, Parity parity) {
  Tridiagonal t;
  if (parity == Parity::even) {
    t.diag.resize(K + 1);
    t.sub.resize(K);
    for (int k = 0; k <= K; ++k) t.diag[k] = static_cast<double>(k) * k;
    for (int k = 0; k < K; ++k) t.sub[k] = q / 4.0;
    if (K > 0) t.sub[0] = q / (2.0 * kSqrt2);
  } else {
    t.diag.resize(K);
    t.sub.resize(K - 1);
    for (int i = 0; i < K; ++i) t.diag[i] = static_cast<double>(i + 1) * (i + 1);
    for (int i = 0; i + 1 < K; ++i) t.sub[i] = q / 4.0;
  }
  return t;
}

double residual(const Tridiagonal& t, const Eigen::VectorXd& v, double eps) {
  const Eigen::Index n = t.diag.size();
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double y = (t.diag[i] - eps) * v[i];
    if (i > 0) y += t.sub[i - 1] * v[i - 1];
    if (i + 1 < n) y += t.sub[i] * v[i + 1];
    r2 += y * y;
  }
  return std::sqrt(r2);
}

void fix_sign(std::vector<double>& c) {
  double mx = 0.0;
  for (double v : c) mx = std::max(mx, std::abs(v));
  for (double v : c) {
    if (std::abs(v) > 1e-10 * mx) {
      if (v < 0.0) {
        for (auto& x : c) x = -x;
      }
      return;
    }
  }
}

double tail_of(const std::vector<double>& c) {
  double t = 0.0;
  const std::size_t n = c.size();
  for (std::size_t i = n >= 3 ? n - 3 : 0; i < n; ++i) t = std::max(t, std::abs(c[i]));
  return t;
}

}  // namespace

std::vector<MathieuMode> solve_modes(double q, int nMax, int truncation, Parity parity) {
  if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument("solve_modes: q must be >= 0");
  if (nMax < 0) throw std::invalid_argument("solve_modes: nMax must be >= 0");
  int K = truncation > 0 ? truncation : initial_truncation(q, nMax);
  K = std::max(K, nMax + 8);
  K = std::min(K, kMaxTruncation);

  for (;;) {
    const Tridiagonal t = build(q, K, parity);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(t.diag, t.sub, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw std::runtime_error("solve_modes: eigensolver failed");

    std::vector<MathieuMode> modes;
    bool tails_ok = true;
    for (int n = 0; n <= nMax; ++n) {
      const double eps = es.eigenvalues()[n];
      const Eigen::VectorXd v = es.eigenvectors().col(n);
      if (residual(t, v, eps) > kResidualTolerance * std::max(1.0, std::abs(eps))) {
        throw std::runtime_error("solve_modes: eigen-residual above tolerance");
      }
      MathieuMode mode;
      mode.n = n;
      mode.q = q;
      mode.charValue = 4.0 * eps;
      mode.truncation = K;
      mode.parity = parity;
      mode.coeffs.assign(v.data(), v.data() + v.size());
      if (parity == Parity::even) mode.coeffs[0] /= kSqrt2;
      fix_sign(mode.coeffs);
      if (tail_of(mode.coeffs) > kTailTolerance) tails_ok = false;
      modes.push_back(std::move(mode));
    }
    if (tails_ok) return modes;
    if (K >= kMaxTruncation) {
      throw std::runtime_error("solve_modes: coefficients not converged at truncation cap " +
                               std::to_string(kMaxTruncation));
    }
    K = std::min(2 * K, kMaxTruncation);
  }
}

MathieuMode solve_mode(double q, int n) { return solve_modes(q, n).at(static_cast<std::size_t>(n)); }

double theta(const MathieuMode& mode) {
  const auto& A = mode.coeffs;
  double s = 0.0;
  if (mode.parity == Parity::even) {
    if (A.size() > 1) s = 2.0 * A[0] * A[1];
    for (std::size_t k = 1; k + 1 < A.size(); ++k) s += A[k] * A[k + 1];
  } else {
    for (std::size_t k = 0; k + 1 < A.size(); ++k) s += A[k] * A[k + 1];
  }
  return s;
}

MomentumWavefunction to_wavefunction(const MathieuMode& mode, int M) {
  const int K = static_cast<int>(mode.coeffs.size()) - (mode.parity == Parity::even ? 1 : 0);
  if (M < 0) M = K;
  std::vector<cplx> c(2 * static_cast<std::size_t>(M) + 1, 0.0);
  auto at = [&](int m) -> cplx& { return c[static_cast<std::size_t>(m + M)]; };
  if (mode.parity == Parity::even) {
    at(0) = kSqrt2 * mode.coeffs[0];
    for (int k = 1; k <= std::min(K, M); ++k) {
      at(k) = mode.coeffs[static_cast<std::size_t>(k)] / kSqrt2;
      at(-k) = at(k);
    }
  } else {
    for (int k = 1; k <= std::min(K, M); ++k) {
      const double b = mode.coeffs[static_cast<std::size_t>(k - 1)] / kSqrt2;
      at(k) = cplx(0.0, b);
      at(-k) = cplx(0.0, -b);
    }
  }
  return MomentumWavefunction(std::move(c), M >= K ? false : true);
}

UncertaintyCurvePoint mode_uncertainties(const MathieuMode& mode) {
  if (tail_of(mode.coeffs) > kTailTolerance) {
    throw std::invalid_argument("mode_uncertainties: mode coefficients are not converged");
  }
  const double th = theta(mode);
  UncertaintyCurvePoint p;
  p.q = mode.q;
  p.n = mode.n;
  p.varE = std::clamp(1.0 - th * th, 0.0, 1.0);
  p.varL = std::max(0.0, (mode.charValue - 2.0 * mode.q * th) / 4.0);
  p.product = std::sqrt(p.varE * p.varL);

  const auto r = uncertainty_report(to_wavefunction(mode));
  const double scale = std::max(1.0, p.varL);
  if (std::abs(r.varE - p.varE) > 1e-8 || std::abs(r.varL - p.varL) > 1e-8 * scale) {
    throw std::runtime_error("mode_uncertainties: closed form disagrees with momentum-space moments");
  }
  return p;
}

UncertaintyCurvePoint asymptotic_uncertainties(int n, double q, Regime regime) {
  if (n < 0 || q < 0.0) throw std::invalid_argument("asymptotic_uncertainties: need n >= 0, q >= 0");
  UncertaintyCurvePoint p;
  p.q = q;
  p.n = n;
  if (regime == Regime::small) {
    p.regimeWarning = q > 1.0;
    if (n == 1) {
      p.varL = 1.0 - 5.0 * q * q / 48.0;
      p.varE = 1.0 - 25.0 * q * q / 144.0;
    } else {
      const double d = 4.0 * n * n - 1.0;
      p.varL = n * n - q * q / (8.0 * d);
      p.varE = 1.0 - q * q / (4.0 * d * d);
    }
  } else {
    p.regimeWarning = q < 100.0;
    const double c = 4.0 * n + 1.0;
    p.varL = c * std::sqrt(q) / 4.0;
    p.varE = c / std::sqrt(q);
  }
  p.product = std::sqrt(std::max(0.0, p.varE * p.varL));
  return p;
}

std::vector<UncertaintyCurvePoint> sweep_uncertainty_curve(int nMax, const std::vector<double>& qGrid) {
  for (std::size_t i = 0; i < qGrid.size(); ++i) {
    if (!(qGrid[i] >= 0.0)) throw std::invalid_argument("sweep: q must be >= 0");
    if (i > 0 && qGrid[i] < qGrid[i - 1]) throw std::invalid_argument("sweep: qGrid must be sorted");
  }
  const std::size_t per = static_cast<std::size_t>(nMax) + 1;
  std::vector<UncertaintyCurvePoint> out(qGrid.size() * per);
  parallel_for(qGrid.size(), [&](std::size_t i) {
    const auto modes = solve_modes(qGrid[i], nMax);
    for (std::size_t n = 0; n < per; ++n) out[i * per + n] = mode_uncertainties(modes[n]);
  });
  return out;
}

double evaluate(const MathieuMode& mode, double eta) {
  double s = 0.0;
  for (std::size_t i = 0; i < mode.coeffs.size(); ++i) {
    if (mode.parity == Parity::even) {
      s += mode.coeffs[i] * std::cos(2.0 * static_cast<double>(i) * eta);
    } else {
      s += mode.coeffs[i] * std::sin(2.0 * static_cast<double>(i + 1) * eta);
    }
  }
  return s;
}

double evaluate_d2(const MathieuMode& mode, double eta) {
  double s = 0.0;
  for (std::size_t i = 0; i < mode.coeffs.size(); ++i) {
    const double k2 = mode.parity == Parity::even ? 2.0 * static_cast<double>(i) : 2.0 * static_cast<double>(i + 1);
    if (mode.parity == Parity::even) {
      s -= k2 * k2 * mode.coeffs[i] * std::cos(k2 * eta);
    } else {
      s -= k2 * k2 * mode.coeffs[i] * std::sin(k2 * eta);
    }
  }
  return s;
}

std::vector<double> fundamental_spectrum(double q, int M) {
  const auto mode = solve_mode(q, 0);
  const auto psi = to_wavefunction(mode, std::max(M, mode.truncation));
  std::vector<double> p(2 * static_cast<std::size_t>(M) + 1);
  for (int m = -M; m <= M; ++m) p[static_cast<std::size_t>(m + M)] = std::norm(psi[m]);
  return p;
}

double q_for_variance(double varE, int n) {
  if (!(varE > 0.0 && varE < 1.0)) throw std::invalid_argument("q_for_variance: need 0 < varE < 1");
  auto f = [&](double lq) {
    const auto mode = solve_mode(std::exp(lq), n);
    const double th = theta(mode);
    return (1.0 - th * th) - varE;
  };
  double lo = std::log(1e-8), hi = std::log(1e8);
  const double flo = f(lo), fhi = f(hi);
  if (flo < 0.0 || fhi > 0.0) throw std::domain_error("q_for_variance: varE outside the reachable range");
  boost::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi,
                                                   boost::math::tools::eps_tolerance<double>(50), iters);
  return std::exp(0.5 * (r.first + r.second));
}

}  // namespace orbita::mathieu
