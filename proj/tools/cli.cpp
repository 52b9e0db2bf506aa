#include "cli.hpp"

#include <CLI11.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "orbita/analysis.hpp"
#include "orbita/io.hpp"
#include "orbita/kernels.hpp"
#include "orbita/mathieu.hpp"
#include "orbita/optics.hpp"
#include "orbita/parallel.hpp"
#include "orbita/special.hpp"
#include "orbita/states.hpp"

namespace orbita::cli {

namespace {

using io::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct StageError : std::runtime_error {
  StageError(std::string s, const std::string& what) : std::runtime_error(what), stage(std::move(s)) {}
  std::string stage;
};

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

struct Options {
  std::string family = "vonmises";
  std::vector<std::string> families{"mathieu", "vonmises", "cosine", "truncated"};
  double alpha = kNaN;
  double mu = 0.0;
  double ell = 0.0;
  double q = kNaN;
  double varE = kNaN;
  int nMax = 2;
  int gridPoints = 60;
  std::string window;
  std::uint64_t seed = 1;
  double noise = 0.0;
  std::string config;
  std::string out;
  std::string input;
  int bootstrap = 200;
  double regularization = -1.0;
  int truncation = 0;
  std::string target;
};

std::pair<int, int> parse_window(const std::string& w, std::pair<int, int> dflt) {
  if (w.empty()) return dflt;
  std::string s = w;
  for (auto& c : s) {
    if (c == ':' || c == ',') c = ' ';
  }
  std::istringstream is(s);
  int lo = 0, hi = 0;
  std::string rest;
  if (!(is >> lo >> hi) || (is >> rest) || hi < lo) {
    throw std::invalid_argument("--window expects lo,hi with lo <= hi");
  }
  return {lo, hi};
}

optics::OpticalConfig optics_config(const Options& o) {
  return o.config.empty() ? optics::OpticalConfig{} : io::load_optical_config(o.config);
}

// Output goes to --out when given, otherwise to the command's stream.
void emit(const Options& o, std::ostream& out, const std::function<void(std::ostream&)>& write) {
  if (o.out.empty()) {
    write(out);
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw std::runtime_error("cannot write '" + o.out + "'");
  write(f);
}

std::ofstream open_in(const std::filesystem::path& dir, const std::string& name) {
  std::ofstream f(dir / name);
  if (!f) throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
  return f;
}

void write_table(std::ostream& os, const SweepTable& t, const io::Metadata& meta) {
  io::write_csv_header(os, meta);
  os.precision(12);
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) os << ',';
      if (std::isfinite(r[i])) os << r[i];
    }
    os << '\n';
  }
}

// Width or q of a single beam from --alpha / --q / --var-e.
double beam_parameter(analysis::FitFamily f, const Options& o) {
  const double given = f == analysis::FitFamily::mathieu ? o.q : o.alpha;
  if (std::isfinite(given)) return given;
  if (std::isfinite(o.varE)) return analysis::width_for_variance(f, o.varE);
  throw std::invalid_argument(f == analysis::FitFamily::mathieu ? "mathieu beams need --q or --var-e"
                                                                 : "need --alpha or --var-e");
}

MomentumWavefunction beam_state(analysis::FitFamily f, double p) {
  if (f == analysis::FitFamily::mathieu) return mathieu::to_wavefunction(mathieu::solve_mode(p, 0));
  states::StateParams sp;
  sp.width = p;
  sp.truncation = 128;
  return states::make_state(analysis::to_state_family(f), sp).state;
}

// Wedge spectrum truncated at its k-th zero, renormalized.
UncertaintyReport wedge_truncated(double alpha, int k) {
  const int M = std::max(1, static_cast<int>(std::floor(2.0 * std::numbers::pi * k / alpha)));
  std::vector<cplx> c(2 * static_cast<std::size_t>(M) + 1);
  for (int m = -M; m <= M; ++m) c[static_cast<std::size_t>(m + M)] = special::sinc(0.5 * m * alpha);
  return uncertainty_report(MomentumWavefunction(std::move(c)));
}

double wedge_truncated_product(double varE, int k) {
  auto g = [&](double a) { return wedge_truncated(a, k).varE - varE; };
  double lo = 1e-2, hi = 2.0 * std::numbers::pi;
  double glo = g(lo), ghi = g(hi);
  if (glo * ghi > 0.0) return kNaN;
  boost::uintmax_t iters = 100;
  const auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(45),
                                                   iters);
  const double a = 0.5 * (r.first + r.second);
  const auto rep = wedge_truncated(a, k);
  // the truncation window jumps with alpha; skip targets that fall in a gap
  if (std::abs(rep.varE - varE) > 1e-6) return kNaN;
  return rep.product;
}

int run_state_verb(const Options& o, std::ostream& out) {
  const auto fam = states::family_from_string(o.family);
  states::StateParams p;
  p.width = std::isfinite(o.alpha) ? o.alpha : 1.0;
  p.mu = o.mu;
  p.ell = o.ell;
  p.truncation = o.truncation;
  const auto pkg = stage("state", [&] { return states::make_state(fam, p); });
  json cfg{{"verb", "state"}, {"family", o.family}, {"alpha", p.width}, {"mu", p.mu}, {"ell", p.ell}};
  const io::Metadata meta{o.seed, io::config_hash(cfg)};
  json j = io::to_json(pkg);
  j["meta"] = io::meta_json(meta);
  const int M = pkg.state.truncation();
  const auto [lo, hi] = parse_window(o.window, {-std::min(M, 64), std::min(M, 64)});
  auto spectrum = [&](std::ostream& os) {
    io::write_csv_header(os, meta);
    os.precision(17);
    os << "m,p,re,im,p_closed\n";
    for (int m = lo; m <= hi; ++m) {
      const cplx c = pkg.state[m];
      const double cf = fam == states::Family::coherent && p.mu != 0.0 ? kNaN : states::closed_form_pm(fam, p, m);
      os << m << ',' << std::norm(c) << ',' << c.real() << ',' << c.imag() << ',';
      if (std::isfinite(cf)) os << cf;
      os << '\n';
    }
  };
  if (o.out.empty()) {
    out << j.dump(2) << '\n';
    return 0;
  }
  {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write '" + o.out + "'");
    f << j.dump(2) << '\n';
  }
  std::filesystem::path sp(o.out);
  std::ofstream f(sp.replace_extension("").string() + "_spectrum.csv");
  spectrum(f);
  return 0;
}

int run_sweep(const Options& o, std::ostream& out) {
  if (o.gridPoints < 2) throw std::invalid_argument("--grid-points must be >= 2");
  const auto t = stage("sweep", [&] { return matched_variance_sweep(o.families, o.gridPoints); });
  json cfg{{"verb", "sweep"}, {"families", o.families}, {"grid", o.gridPoints}};
  emit(o, out, [&](std::ostream& os) { write_table(os, t, {o.seed, io::config_hash(cfg)}); });
  return 0;
}

int run_simulate(const Options& o, std::ostream& out) {
  auto cfg = optics_config(o);
  const auto fam = analysis::fit_family_from_string(o.family);
  const double p = beam_parameter(fam, o);
  const auto [lo, hi] = parse_window(o.window, {cfg.helicityLo, cfg.helicityHi});
  cfg.helicityLo = lo;
  cfg.helicityHi = hi;
  const auto spec = stage("simulate", [&] {
    return optics::simulate_spectrum(beam_state(fam, p), cfg, optics::NoiseModel{o.seed, o.noise});
  });
  json c{{"verb", "simulate"}, {"family", o.family}, {"param", p}, {"noise", o.noise}, {"optics", io::to_json(cfg)}};
  emit(o, out, [&](std::ostream& os) { io::write_spectrum_csv(os, spec, {o.seed, io::config_hash(c)}); });
  return 0;
}

int run_respmat(const Options& o, std::ostream& out) {
  auto cfg = optics_config(o);
  const auto [lo, hi] = parse_window(o.window, {cfg.helicityLo, cfg.helicityHi});
  cfg.helicityLo = lo;
  cfg.helicityHi = hi;
  const auto C = stage("respmat", [&] { return optics::response_matrix(cfg); });
  json c{{"verb", "respmat"}, {"optics", io::to_json(cfg)}};
  emit(o, out, [&](std::ostream& os) { io::write_response_csv(os, C, {o.seed, io::config_hash(c)}); });
  return 0;
}

int run_analyze(const Options& o, std::ostream& out) {
  if (o.input.empty()) throw std::invalid_argument("analyze needs --input <spectrum.csv>");
  const auto cfg = optics_config(o);
  const auto fam = analysis::fit_family_from_string(o.family);
  const auto measured = stage("load", [&] {
    std::ifstream in(o.input);
    if (!in) throw std::runtime_error("cannot open '" + o.input + "'");
    return io::read_spectrum_csv(in);
  });
  const auto C = stage("respmat", [&] {
    return optics::response_matrix(cfg, measured.nLo, measured.nHi, measured.nLo - cfg.modeMargin,
                                   measured.nHi + cfg.modeMargin);
  });
  const double lambda = o.regularization >= 0.0
                            ? o.regularization
                            : stage("deconvolve", [&] { return analysis::l_curve(measured, C).best(); });
  const auto rec = stage("deconvolve", [&] { return analysis::deconvolve(measured, C, lambda); });
  auto fit = stage("fit", [&] { return analysis::fit_family(rec, fam); });
  fit = stage("bootstrap", [&] { return analysis::uncertainty_with_errors(fit, rec, o.bootstrap, o.seed); });

  json c{{"verb", "analyze"}, {"family", o.family}, {"regularization", lambda}, {"optics", io::to_json(cfg)}};
  const io::Metadata meta{o.seed, io::config_hash(c)};
  json j{{"meta", io::meta_json(meta)},
         {"fit", io::to_json(fit)},
         {"regularization", lambda},
         {"nonnegative", rec.nonnegative}};
  double raw = 0.0;
  for (double v : measured.power) raw += v;
  auto triple = [&](std::ostream& os) {
    io::write_csv_header(os, meta);
    os.precision(12);
    os << "m,raw,deconvolved,fitted\n";
    for (int m = rec.mLo; m <= rec.mHi; ++m) {
      const auto k = static_cast<std::size_t>(m - rec.mLo);
      os << m << ',' << measured.power[k] / raw << ',' << rec.p[k] << ',' << fit.fitted[k] << '\n';
    }
  };
  if (o.out.empty()) {
    out << j.dump(2) << '\n';
    return 0;
  }
  {
    std::ofstream f(o.out);
    if (!f) throw std::runtime_error("cannot write '" + o.out + "'");
    f << j.dump(2) << '\n';
  }
  std::filesystem::path p(o.out);
  std::ofstream f(p.replace_extension("").string() + "_triple.csv");
  triple(f);
  return 0;
}

analysis::Scenario fig9_scenario(std::uint64_t seed, double noise) {
  analysis::Scenario s;
  s.seed = seed;
  s.noise = {seed, noise};
  for (double v : {0.31, 0.54, 0.79, 0.91}) s.states.push_back({analysis::FitFamily::mathieu, kNaN, v});
  for (double v : {0.3, 0.5, 0.7, 0.9}) s.states.push_back({analysis::FitFamily::vonMises, kNaN, v});
  for (double v : {0.3, 0.6, 0.8, 0.9}) s.states.push_back({analysis::FitFamily::cosine, kNaN, v});
  for (double v : {0.2, 0.4, 0.6, 0.8}) s.states.push_back({analysis::FitFamily::wedge, kNaN, v});
  s.tripleIndex = 1;
  return s;
}

int run_reproduce(const Options& o, std::ostream& out) {
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("reproduce_" + o.target) : std::filesystem::path(o.out);
  std::filesystem::create_directories(dir);
  if (o.target == "fig2") {
    const auto t = stage("fig2", [&] { return mathieu_curves(o.nMax, o.gridPoints < 2 ? 121 : o.gridPoints); });
    json c{{"target", "fig2"}, {"nMax", o.nMax}, {"grid", o.gridPoints}};
    auto f = open_in(dir, "fig2_mathieu.csv");
    write_table(f, t, {o.seed, io::config_hash(c)});
  } else if (o.target == "fig3") {
    const std::vector<std::string> fams{"mathieu", "wedge", "cosine", "vonmises", "truncated"};
    const auto t = stage("fig3", [&] { return matched_variance_sweep(fams, o.gridPoints); });
    json c{{"target", "fig3"}, {"grid", o.gridPoints}};
    auto f = open_in(dir, "fig3_products.csv");
    write_table(f, t, {o.seed, io::config_hash(c)});
  } else if (o.target == "fig7") {
    const auto cfg = optics_config(o);
    json c{{"target", "fig7"}, {"optics", io::to_json(cfg)}};
    const io::Metadata meta{o.seed, io::config_hash(c)};
    const auto C = stage("respmat", [&] { return optics::response_matrix(cfg); });
    auto f = open_in(dir, "fig7_response.csv");
    io::write_response_csv(f, C, meta);
    const auto scan = stage("aperture", [&] {
      return optics::optimize_aperture(cfg, {-2, -1, 0, 1, 2}, optics::default_aperture_grid());
    });
    auto g = open_in(dir, "fig7_aperture.csv");
    io::write_csv_header(g, meta);
    g.precision(12);
    g << "R,loss,crosstalk,objective\n";
    for (std::size_t i = 0; i < scan.radius.size(); ++i) {
      g << scan.radius[i] << ',' << scan.loss[i] << ',' << scan.crosstalk[i] << ',' << scan.objective[i] << '\n';
    }
    auto h = open_in(dir, "fig7_dominance.csv");
    io::write_csv_header(h, meta);
    h.precision(12);
    h << "N,dominance\n";
    for (int N = cfg.helicityLo; N <= cfg.helicityHi; ++N) h << N << ',' << C.dominance(N, C.mLo, C.mHi) << '\n';
    out << "best aperture " << scan.bestRadius() << " m\n";
  } else {
    auto sc = fig9_scenario(o.seed, o.noise > 0.0 ? o.noise : 0.01);
    if (!o.config.empty()) sc.optics = io::load_optical_config(o.config);
    sc.bootstrap = o.bootstrap;
    const auto r = stage("pipeline", [&] { return analysis::run_pipeline(sc); });
    const io::Metadata meta{o.seed, io::config_hash(io::to_json(sc))};
    auto f = open_in(dir, "fig9_products.csv");
    io::write_pipeline_csv(f, r, meta);
    auto g = open_in(dir, "fig8_triple.csv");
    io::write_triple_csv(g, r, meta);
  }
  out << "wrote " << dir.string() << '\n';
  return 0;
}

}  // namespace

// ---------------------------------------------------------------------------

SweepTable matched_variance_sweep(const std::vector<std::string>& families, int gridPoints, double lo, double hi) {
  SweepTable t;
  t.columns.push_back("varE");
  struct Col {
    bool wedge;
    analysis::FitFamily fam;
  };
  std::vector<Col> cols;
  for (const auto& name : families) {
    const auto fam = analysis::fit_family_from_string(name);
    if (fam == analysis::FitFamily::wedge) {
      cols.push_back({true, fam});
      t.columns.push_back("wedge_min1");
      cols.push_back({true, fam});
      t.columns.push_back("wedge_min2");
    } else {
      cols.push_back({false, fam});
      t.columns.push_back(std::string(analysis::to_string(fam)));
    }
    if (fam == analysis::FitFamily::mathieu) {
      cols.push_back({false, fam});
      t.columns.push_back("mathieu_q");
    }
  }
  t.rows.assign(static_cast<std::size_t>(gridPoints), std::vector<double>(t.columns.size(), kNaN));
  parallel_for(t.rows.size(), [&](std::size_t i) {
    auto& row = t.rows[i];
    const double v = lo + (hi - lo) * static_cast<double>(i) / (gridPoints - 1);
    row[0] = v;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& col = t.columns[c + 1];
      try {
        if (cols[c].wedge) {
          row[c + 1] = wedge_truncated_product(v, col == "wedge_min1" ? 1 : 2);
        } else if (col == "mathieu_q") {
          row[c + 1] = mathieu::q_for_variance(v, 0);
        } else {
          const double p = analysis::width_for_variance(cols[c].fam, v);
          row[c + 1] = analysis::theory(cols[c].fam, p, -15, 15).product;
        }
      } catch (const std::domain_error&) {
        row[c + 1] = kNaN;  // variance not reachable by this family
      }
    }
  });
  return t;
}

SweepTable mathieu_curves(int nMax, int gridPoints) {
  if (nMax < 0 || gridPoints < 2) throw std::invalid_argument("mathieu_curves: need nMax >= 0, gridPoints >= 2");
  std::vector<double> q(static_cast<std::size_t>(gridPoints));
  for (int i = 0; i < gridPoints; ++i) q[static_cast<std::size_t>(i)] = std::pow(10.0, -2.0 + 6.0 * i / (gridPoints - 1));
  const auto pts = mathieu::sweep_uncertainty_curve(nMax, q);
  SweepTable t;
  t.columns = {"q", "n", "varE", "varL", "product", "varE_small", "varL_small", "varE_large", "varL_large"};
  for (const auto& p : pts) {
    const auto s = mathieu::asymptotic_uncertainties(p.n, p.q, mathieu::Regime::small);
    const auto l = mathieu::asymptotic_uncertainties(p.n, p.q, mathieu::Regime::large);
    t.rows.push_back({p.q, static_cast<double>(p.n), p.varE, p.varL, p.product, s.varE, s.varL, l.varE, l.varL});
  }
  return t;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"orbita: angle and angular-momentum uncertainty on the circle"};
  app.set_version_flag("--version", std::string(io::kVersion));
  app.require_subcommand(1);
  Options o;

  auto* state = app.add_subcommand("state", "build a state, write its package JSON and spectrum CSV");
  state->add_option("--family", o.family, "wedge|cosine|vonmises|truncated|wrapped|coherent")->required();
  state->add_option("--alpha", o.alpha, "width parameter (sigma for wrapped)");
  state->add_option("--mu", o.mu, "center angle (theta for coherent)");
  state->add_option("--ell", o.ell, "coherent log-radius");
  state->add_option("--truncation", o.truncation, "fixed momentum window M (0 = automatic)");
  state->add_option("--window", o.window, "spectrum rows lo,hi");
  state->add_option("--seed", o.seed);
  state->add_option("--out", o.out, "JSON path; the spectrum goes to <stem>_spectrum.csv");

  auto* sweep = app.add_subcommand("sweep", "uncertainty products of all families on a matched-varE grid");
  sweep->add_option("--families", o.families, "comma separated")->delimiter(',');
  sweep->add_option("--grid-points", o.gridPoints);
  sweep->add_option("--n-max", o.nMax);
  sweep->add_option("--seed", o.seed);
  sweep->add_option("--out", o.out);

  auto* sim = app.add_subcommand("simulate", "simulated detected OAM spectrum of one beam");
  sim->add_option("--family", o.family)->required();
  sim->add_option("--alpha", o.alpha);
  sim->add_option("--q", o.q);
  sim->add_option("--var-e", o.varE, "pick the width by circular variance");
  sim->add_option("--noise", o.noise, "relative Gaussian noise level");
  sim->add_option("--seed", o.seed);
  sim->add_option("--window", o.window, "analyzer charges lo,hi");
  sim->add_option("--config", o.config, "optics JSON");
  sim->add_option("--out", o.out);

  auto* resp = app.add_subcommand("respmat", "response matrix C[N][m]");
  resp->add_option("--config", o.config, "optics JSON");
  resp->add_option("--window", o.window, "analyzer charges lo,hi");
  resp->add_option("--seed", o.seed);
  resp->add_option("--out", o.out);

  auto* an = app.add_subcommand("analyze", "deconvolve and fit a measured spectrum");
  an->add_option("--input", o.input, "spectrum CSV (N,power)")->required();
  an->add_option("--family", o.family)->required();
  an->add_option("--config", o.config, "optics JSON");
  an->add_option("--regularization", o.regularization, "Tikhonov weight (default: L-curve corner)");
  an->add_option("--bootstrap", o.bootstrap);
  an->add_option("--seed", o.seed);
  an->add_option("--out", o.out, "JSON path; the triple goes to <stem>_triple.csv");

  auto* rep = app.add_subcommand("reproduce", "canonical figure runs");
  rep->add_option("target", o.target)->required()->check(CLI::IsMember({"fig2", "fig3", "fig7", "fig9"}));
  rep->add_option("--seed", o.seed);
  rep->add_option("--grid-points", o.gridPoints);
  rep->add_option("--n-max", o.nMax);
  rep->add_option("--noise", o.noise);
  rep->add_option("--bootstrap", o.bootstrap);
  rep->add_option("--config", o.config, "optics JSON");
  rep->add_option("--out", o.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);  // --help, --version
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    if (verb == "state") return run_state_verb(o, out);
    if (verb == "sweep") return run_sweep(o, out);
    if (verb == "simulate") return run_simulate(o, out);
    if (verb == "respmat") return run_respmat(o, out);
    if (verb == "analyze") return run_analyze(o, out);
    return run_reproduce(o, out);
  } catch (const StageError& e) {
    err << io::error_record(e.stage, e.what()).dump() << '\n';
  } catch (const std::exception& e) {
    err << io::error_record(verb, e.what()).dump() << '\n';
  }
  return 1;
}

}  // namespace orbita::cli
