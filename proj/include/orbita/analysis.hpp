#pragma once

// Data pipeline for measured OAM spectra: undo detector crosstalk, fit a
// one-parameter angular family, and attach bootstrap error bars to the
// resulting uncertainty product.

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "orbita/optics.hpp"
#include "orbita/states.hpp"

namespace orbita::analysis {

enum class FitFamily { wedge, cosine, vonMises, truncatedGaussian, wrappedGaussian, mathieu };

std::string_view to_string(FitFamily f);
FitFamily fit_family_from_string(std::string_view s);  // throws std::invalid_argument
states::Family to_state_family(FitFamily f);           // throws for mathieu

struct RecoveredSpectrum {
  int mLo = 0, mHi = 0;
  std::vector<double> p;       // m = mLo..mHi, nonnegative, sums to 1
  double regularization = 0.0;
  bool nonnegative = true;     // the solver enforces p >= 0
  // set by deconvolve; lets the bootstrap resample in the measured domain
  std::optional<optics::MeasuredSpectrum> measured;
  std::shared_ptr<const optics::ResponseMatrix> response;
  double at(int m) const { return p[static_cast<std::size_t>(m - mLo)]; }
};

/// min |C p - y|^2 + lambda |p|^2 subject to p >= 0, with C restricted to the
/// window columns. lambda = 0 on an ill-conditioned C throws std::domain_error.
RecoveredSpectrum deconvolve(const optics::MeasuredSpectrum& measured, const optics::ResponseMatrix& response,
                             double regularization);

struct LCurve {
  std::vector<double> lambda, residualNorm, solutionNorm, curvature;
  std::size_t corner = 0;
  double best() const { return lambda[corner]; }
};

/// Regularization scan; the corner is the point of maximum Menger curvature of
/// (log residual, log solution norm).
LCurve l_curve(const optics::MeasuredSpectrum& measured, const optics::ResponseMatrix& response, int points = 41);

struct FitResult {
  FitFamily family = FitFamily::vonMises;
  double widthParam = 0.0;      // alpha, sigma or q
  double normalization = 0.0;
  double residualNorm = 0.0;
  double varE = 0.0;
  double varL = 0.0;
  double product = 0.0;
  double errorBars = 0.0;       // bootstrap standard deviation of the product
  int mLo = 0, mHi = 0;
  std::vector<double> fitted;   // normalization * model over the window
};

class FitError : public std::runtime_error {
 public:
  FitError(const std::string& what, std::vector<double> params, std::vector<double> objective)
      : std::runtime_error(what), scanParams(std::move(params)), scanObjective(std::move(objective)) {}
  std::vector<double> scanParams;
  std::vector<double> scanObjective;
};

/// Weighted least squares over (normalization, width) with weights
/// 1 / max(p_m, 1e-4), p_m the normalized model spectrum; the normalization is
/// profiled out.
FitResult fit_family(const RecoveredSpectrum& recovered, FitFamily family);

/// Model spectrum p_m for m = lo..hi at the given width parameter.
std::vector<double> model_spectrum(FitFamily family, double param, int lo, int hi);

/// Parameter range searched by fit_family.
std::pair<double, double> parameter_range(FitFamily family);

/// Theory values at a parameter. The wedge varL is the window variance over
/// [lo, hi]; other families ignore the window.
struct TheoryPoint {
  double varE = 0.0, varL = 0.0, product = 0.0;
};
TheoryPoint theory(FitFamily family, double param, int lo, int hi);

/// Width parameter with the given circular variance.
double width_for_variance(FitFamily family, double varE);

/// Residual bootstrap; errorBars is the standard deviation of the product. When
/// the spectrum came from deconvolve, relative residuals of the measured powers
/// against C * fit are resampled and every replicate is deconvolved and refitted.
/// Otherwise standardized residuals of the spectrum itself are resampled.
FitResult uncertainty_with_errors(const FitResult& fit, const RecoveredSpectrum& recovered, int bootstrapCount,
                                  std::uint64_t seed);

struct ScenarioState {
  FitFamily family = FitFamily::mathieu;
  double width = std::numeric_limits<double>::quiet_NaN();  // used when finite
  double varE = std::numeric_limits<double>::quiet_NaN();   // otherwise solved for
};

struct Scenario {
  std::vector<ScenarioState> states;
  optics::OpticalConfig optics;
  optics::NoiseModel noise;
  int windowLo = -15, windowHi = 15;
  int bootstrap = 200;
  std::uint64_t seed = 1;
  double regularization = -1.0;  // < 0: L-curve corner
  std::size_t tripleIndex = 0;   // state whose raw/deconvolved/fitted columns are emitted
};

struct PipelineRow {
  std::string family;
  double widthParam = 0.0;
  double varETheory = 0.0;
  double productTheory = 0.0;
  double fittedWidth = 0.0;
  double varERecovered = 0.0;
  double productRecovered = 0.0;
  double errorBar = 0.0;
  double residualNorm = 0.0;
  double regularization = 0.0;
};

struct TripleRow {
  int m = 0;
  double raw = 0.0, deconvolved = 0.0, fitted = 0.0;
};

struct PipelineResult {
  std::vector<PipelineRow> rows;
  std::vector<TripleRow> triple;
};

/// simulate -> deconvolve -> fit -> bootstrap for every state of the scenario.
PipelineResult run_pipeline(const Scenario& scenario);

/// Pipeline stages for a single state; exposed for callers that already hold a
/// response matrix.
struct StateRun {
  PipelineRow row;
  optics::MeasuredSpectrum measured;
  RecoveredSpectrum recovered;
  FitResult fit;
};
StateRun run_state(const ScenarioState& s, const Scenario& scenario, const optics::ResponseMatrix& response,
                   std::uint64_t noiseSeed);

}  // namespace orbita::analysis
