// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "orbita/analysis.hpp"
#include "orbita/core.hpp"
#include "orbita/mathieu.hpp"
#include "orbita/optics.hpp"
#include "orbita/states.hpp"

using namespace orbita;
using states::Family;

namespace {

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail << "first failure: " << what << "; ";
    ok = ok && cond;
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void report(int n, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.detail << "exception: " << e.what() << "; ";
  }
  std::printf("criterion %2d: %s  (%.1f s)  %s\n", n, c.ok ? "PASS" : "FAIL", seconds_since(t0), c.detail.str().c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

std::string str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

states::StateParams width(double a) {
  states::StateParams p;
  p.width = a;
  return p;
}

}  // namespace

int main() {
  report(1, [](Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> g;
    double worst = INFINITY;
    for (int i = 0; i < 1000; ++i) {
      std::vector<cplx> v(65);
      for (auto& z : v) z = {g(rng), g(rng)};
      const auto r = uncertainty_report(MomentumWavefunction(std::move(v)));
      worst = std::min({worst, r.dispersion_slack(), r.cosine_slack(), r.sine_slack()});
    }
    const double t = seconds_since(t0);
    c.detail << "min slack " << str(worst) << "; ";
    c.require(worst >= -1e-12, "slack " + str(worst));
    c.require(t < 10.0, "runtime " + str(t));
  });

  report(2, [](Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int n = 0; n <= 2; ++n) {
      const double target = (4.0 * n + 1.0) / 2.0;
      auto dev = [&](double q) {
        return std::abs(mathieu::mode_uncertainties(mathieu::solve_mode(q, n)).product - target) / target;
      };
      const double d4 = dev(1e4), d2 = dev(1e2);
      c.detail << "n=" << n << " " << str(d2) << "->" << str(d4) << "; ";
      c.require(d4 <= 0.05, "n=" + std::to_string(n) + " at 1e4");
      c.require(d2 <= 0.35, "n=" + std::to_string(n) + " at 1e2");
      c.require(d2 > d4, "n=" + std::to_string(n) + " not monotone");
    }
    c.require(seconds_since(t0) < 5.0, "runtime");
  });

  report(3, [](Check& c) {
    for (int n = 0; n <= 2; ++n) {
      std::vector<double> err;
      for (double q : {0.05, 0.1, 0.2}) {
        const auto num = mathieu::mode_uncertainties(mathieu::solve_mode(q, n));
        err.push_back(std::abs(num.varL - mathieu::asymptotic_uncertainties(n, q, mathieu::Regime::small).varL));
      }
      c.detail << "n=" << n << " err(0.1)=" << str(err[1]) << "; ";
      c.require(err[1] <= 1e-4, "n=" + std::to_string(n) + " error at q=0.1");
      for (int k = 0; k < 2; ++k) {
        const double ratio = err[k + 1] / err[k];
        c.require(ratio >= 8.0 && ratio <= 32.0, "n=" + std::to_string(n) + " scaling " + str(ratio));
      }
    }
  });

  report(4, [](Check& c) {
    const std::vector<std::pair<Family, std::vector<double>>> grids{
        {Family::wedge, {0.2, 0.6, 1.0, 1.5, 2.0, 2.7, 3.3, 4.2, 5.1, 6.2}},
        // closed-form varE covers alpha <= 2, where the half-wave does not overlap itself
        {Family::cosine, {0.1, 0.3, 0.5, 0.7, 0.9, 1.1, 1.3, 1.5, 1.8, 2.0}},
        {Family::vonMises, {0.02, 0.05, 0.1, 0.2, 0.4, 0.8, 1.5, 3.0, 6.0, 12.0}},
        {Family::truncatedGaussian, {0.1, 0.3, 0.6, 1.0, 1.5, 2.0, 3.0, 5.0, 8.0, 15.0}},
        {Family::wrappedGaussian, {0.03, 0.1, 0.2, 0.4, 0.7, 1.0, 1.4, 2.0, 2.6, 3.5}}};
    double worstP = 0.0, worstV = 0.0;
    for (const auto& [f, grid] : grids) {
      for (double a : grid) {
        const double cv = states::closed_form_varE(f, a);
        const double qv = states::quadrature_varE(f, a);
        worstV = std::max(worstV, std::abs(cv - qv));
        // the wrapped Gaussian has a closed varE but no closed p_m
        if (f == Family::wrappedGaussian) continue;
        const auto q = states::quadrature_coefficients(f, a, 24);
        for (int m = -24; m <= 24; ++m) {
          worstP = std::max(worstP, std::abs(states::closed_form_pm(f, width(a), m) - std::norm(q[m + 24])));
        }
      }
    }
    c.detail << "max |dp| " << str(worstP) << ", max |dvarE| " << str(worstV) << "; ";
    c.require(worstP <= 1e-6, "p_m");
    c.require(worstV <= 1e-6, "varE");
    for (double a : {0.1, 0.5, 1.0, 1.5, 2.0}) {
      c.require(std::abs(states::closed_form_varL(Family::cosine, a) * a * a - 1.0) <= 1e-10, "cosine varL a=" + str(a));
      c.require(std::abs(states::quadrature_varL(Family::cosine, a) * a * a - 1.0) <= 1e-10,
                "cosine quadrature varL a=" + str(a));
    }
    for (double a : grids[2].second) {
      double s = 0.0;
      for (int m = -600; m <= 600; ++m) s += states::closed_form_pm(Family::vonMises, width(a), m);
      c.require(std::abs(s - 1.0) <= 1e-10, "von Mises sum a=" + str(a));
    }
  });

  report(5, [](Check& c) {
    using analysis::FitFamily;
    int mv = 0, vt = 0, mc = 0;
    double lastVt = NAN;
    for (int i = 0; i < 60; ++i) {
      const double v = 0.1 + (0.95 - 0.1) * i / 59.0;
      auto product = [&](FitFamily f) { return analysis::theory(f, analysis::width_for_variance(f, v), -15, 15).product; };
      const double ma = product(FitFamily::mathieu), vm = product(FitFamily::vonMises);
      const double tg = product(FitFamily::truncatedGaussian), co = product(FitFamily::cosine);
      if (ma > vm + 1e-9) ++mv;
      if (vm > tg + 1e-9) {
        ++vt;
        lastVt = v;
        if (vt == 1) c.detail << "varE=" << str(v) << ": vonMises " << str(vm) << " > truncated " << str(tg) << "; ";
      }
      if (ma > co + 1e-9) ++mc;
    }
    c.detail << "violations over 60 points: mathieu>vonMises " << mv << ", vonMises>truncated " << vt
             << " (up to varE=" << str(lastVt) << "), mathieu>cosine " << mc << "; ";
    c.require(mv + vt + mc == 0, "ordering");
  });

  report(6, [](Check& c) {
    double worstSat = 0.0, worstEig = 0.0;
    for (auto [theta, ell] : {std::pair{0.0, 0.0}, std::pair{0.7, 0.3}, std::pair{-1.2, -0.4}, std::pair{2.5, 0.8},
                              std::pair{-3.0, -1.0}}) {
      states::StateParams p;
      p.mu = theta;
      p.ell = ell;
      p.truncation = 32;
      const auto rep = states::verify_eigenrelations(states::make_state(Family::coherent, p));
      worstSat = std::max(worstSat, rep.saturationGap);
      worstEig = std::max(worstEig, rep.eigenResidual);
    }
    c.detail << "saturation gap " << str(worstSat) << ", eigen residual " << str(worstEig) << "; ";
    c.require(worstSat <= 1e-8, "saturation");
    c.require(worstEig <= 1e-8, "eigen residual");
  });

  report(7, [](Check& c) {
    optics::OpticalConfig cfg;
    const double w = cfg.beam_radius();
    double worst = 0.0;
    for (int m = 0; m <= 8; ++m) {
      double peak = 0.0, diff = 0.0;
      for (double r : {0.0, 0.1 * w, 0.3 * w, 0.7 * w, w, 1.5 * w, 2.5 * w}) {
        const cplx a = optics::A_closed_form(m, r, cfg);
        peak = std::max(peak, std::abs(a));
        diff = std::max(diff, std::abs(a - optics::A_quadrature(m, r, cfg)));
      }
      worst = std::max(worst, diff / peak);
    }
    c.detail << "max relative |dA| " << str(worst) << "; ";
    c.require(worst <= 1e-6, "A_m");

    const int N = 2;
    optics::MaskSpectrum mask;
    mask.M = 6;
    mask.a.assign(13, cplx(0.3));
    const auto fields = optics::propagate(mask, cfg);
    const auto dec = optics::analyzer_field(fields, N, cfg);
    double worstAxis = 0.0;
    for (const auto& f : fields) {
      if (f.m == N) continue;
      double peak = 0.0;
      for (const auto& v : dec.vbar(f.m)) peak = std::max(peak, std::abs(v));
      worstAxis = std::max(worstAxis, std::abs(optics::hankel(f, f.m - N, {0.0})[0]) / peak);
    }
    c.detail << "max |vbar_m(0)|/peak " << str(worstAxis) << "; ";
    c.require(worstAxis <= 1e-10, "on-axis null");
  });

  report(8, [](Check& c) {
    optics::OpticalConfig cfg;
    const auto C = optics::response_matrix(cfg);
    double prev = INFINITY;
    for (int N = 0; N <= 5; ++N) {
      const double d = C.dominance(N, C.mLo, C.mHi);
      c.detail << str(d) << (N < 5 ? " > " : "; ");
      c.require(d < prev, "dominance at N=" + std::to_string(N));
      prev = d;
    }
    const auto grid = optics::default_aperture_grid();
    const auto scan = optics::optimize_aperture(cfg, {-2, -1, 0, 1, 2}, grid);
    c.detail << "best R " << str(scan.bestRadius()) << " (index " << scan.best << "/" << grid.size() - 1 << "); ";
    c.require(scan.best > 0 && scan.best + 1 < grid.size(), "aperture optimum on the boundary");
  });

  bool pipelineOk = false;
  report(9, [&](Check& c) {
    const auto t0 = std::chrono::steady_clock::now();
    analysis::Scenario sc;
    sc.seed = 7;
    sc.noise = {7, 0.01};
    sc.bootstrap = 200;
    for (double v : {0.31, 0.54, 0.79, 0.91}) sc.states.push_back({analysis::FitFamily::mathieu, NAN, v});
    for (double v : {0.2, 0.4, 0.6, 0.8}) sc.states.push_back({analysis::FitFamily::wedge, NAN, v});
    const auto res = analysis::run_pipeline(sc);
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& r = res.rows[i];
      const double dev = (r.productRecovered - r.productTheory) / r.errorBar;
      c.detail << "mathieu " << str(r.varETheory) << ": " << str(dev) << " sigma; ";
      c.require(std::abs(r.productRecovered - r.productTheory) <= r.errorBar, "mathieu varE=" + str(r.varETheory));
    }
    for (std::size_t i = 5; i < 8; ++i) {
      c.require(res.rows[i].productRecovered > res.rows[i - 1].productRecovered,
                "wedge product not increasing at varE=" + str(res.rows[i].varETheory));
    }
    c.detail << "wedge " << str(res.rows[4].productRecovered) << ".." << str(res.rows[7].productRecovered) << "; ";
    const double t = seconds_since(t0);
    c.require(t < 300.0, "runtime " + str(t));
    pipelineOk = c.ok;
  });

  report(10, [&](Check& c) {
    c.detail << "NOTE: measured data points come from hardware and are not reproducible; the synthetic "
                "end-to-end analogue is criterion 9 together with the oracle suites 1-8; ";
    c.require(pipelineOk, "criterion 9");
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
