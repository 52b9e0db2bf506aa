#include "orbita/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace orbita::io {

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json cplx_json(cplx z) { return json::array({num(z.real()), num(z.imag())}); }

void reject_unknown(const json& j, const std::set<std::string>& known, std::string_view what) {
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) throw std::invalid_argument(std::string(what) + ": unknown key '" + k + "'");
  }
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const json& config) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config.dump())));
  return buf;
}

void write_csv_header(std::ostream& os, const Metadata& meta) {
  os << "# orbita " << kVersion << "\n# seed " << meta.seed << "\n# config " << meta.configHash << "\n";
}

json meta_json(const Metadata& meta) {
  return {{"version", std::string(kVersion)}, {"seed", meta.seed}, {"configHash", meta.configHash}};
}

json to_json(const UncertaintyReport& r) {
  return {{"meanE", cplx_json(r.meanE)},
          {"meanE2", cplx_json(r.meanE2)},
          {"meanL", num(r.meanL)},
          {"meanL2", num(r.meanL2)},
          {"varE", num(r.varE)},
          {"varL", num(r.varL)},
          {"varC", num(r.varC)},
          {"varS", num(r.varS)},
          {"meanC", num(r.meanC)},
          {"meanS", num(r.meanS)},
          {"product", num(r.product)},
          {"angularDeviation", num(r.angularDeviation)}};
}

json to_json(const states::StatePackage& pkg) {
  json j;
  j["family"] = std::string(states::to_string(pkg.family));
  j["params"] = {{"width", pkg.params.width}, {"mu", pkg.params.mu}, {"ell", pkg.params.ell}};
  j["truncation"] = pkg.state.truncation();
  j["converged"] = pkg.converged;
  j["tailWeight"] = pkg.state.tail_weight();
  j["report"] = to_json(uncertainty_report(pkg.state));
  if (pkg.closedForm) {
    j["closedForm"] = to_json(*pkg.closedForm);
    if (pkg.family == states::Family::wedge) j["closedFormWindow"] = pkg.closedFormWindow;
  }
  return j;
}

json to_json(const optics::OpticalConfig& c) {
  return {{"wavelength", c.wavelength},
          {"waist", c.waist},
          {"z", c.distance},
          {"focal", c.focal},
          {"R", c.aperture},
          {"grid", {{"samples", c.radialSamples}, {"rMaxFactor", c.rMaxFactor}}},
          {"helicity", {c.helicityLo, c.helicityHi}},
          {"modeMargin", c.modeMargin}};
}

json to_json(const analysis::FitResult& f) {
  return {{"family", std::string(analysis::to_string(f.family))},
          {"widthParam", f.widthParam},
          {"normalization", f.normalization},
          {"residualNorm", f.residualNorm},
          {"varE", num(f.varE)},
          {"varL", num(f.varL)},
          {"product", num(f.product)},
          {"errorBars", f.errorBars},
          {"window", {f.mLo, f.mHi}}};
}

optics::OpticalConfig optical_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("optics config must be a JSON object");
  reject_unknown(j, {"wavelength", "waist", "z", "focal", "R", "grid", "helicity", "modeMargin"}, "optics config");
  optics::OpticalConfig c;
  c.wavelength = j.value("wavelength", c.wavelength);
  c.waist = j.value("waist", c.waist);
  c.distance = j.value("z", c.distance);
  c.focal = j.value("focal", c.focal);
  c.aperture = j.value("R", c.aperture);
  if (j.contains("grid")) {
    const auto& g = j.at("grid");
    reject_unknown(g, {"samples", "rMaxFactor"}, "optics grid");
    c.radialSamples = g.value("samples", c.radialSamples);
    c.rMaxFactor = g.value("rMaxFactor", c.rMaxFactor);
  }
  if (j.contains("helicity")) {
    const auto& h = j.at("helicity");
    if (!h.is_array() || h.size() != 2) throw std::invalid_argument("optics config: helicity must be [lo, hi]");
    c.helicityLo = h[0].get<int>();
    c.helicityHi = h[1].get<int>();
  }
  c.modeMargin = j.value("modeMargin", c.modeMargin);
  c.validate();
  return c;
}

optics::OpticalConfig load_optical_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config '" + path + "'");
  return optical_config_from_json(json::parse(in));
}

analysis::Scenario scenario_from_json(const json& j) {
  reject_unknown(j, {"states", "optics", "noise", "window", "bootstrap", "seed", "regularization", "triple"},
                 "scenario");
  analysis::Scenario s;
  for (const auto& st : j.at("states")) {
    reject_unknown(st, {"family", "width", "varE"}, "scenario state");
    analysis::ScenarioState ss;
    ss.family = analysis::fit_family_from_string(st.at("family").get<std::string>());
    if (st.contains("width")) ss.width = st.at("width").get<double>();
    if (st.contains("varE")) ss.varE = st.at("varE").get<double>();
    if (!std::isfinite(ss.width) && !std::isfinite(ss.varE)) {
      throw std::invalid_argument("scenario state needs width or varE");
    }
    s.states.push_back(ss);
  }
  if (j.contains("optics")) s.optics = optical_config_from_json(j.at("optics"));
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    reject_unknown(n, {"seed", "level"}, "scenario noise");
    s.noise.seed = n.value("seed", s.noise.seed);
    s.noise.relativeLevel = n.value("level", s.noise.relativeLevel);
  }
  if (j.contains("window")) {
    s.windowLo = j.at("window").at(0).get<int>();
    s.windowHi = j.at("window").at(1).get<int>();
  }
  s.bootstrap = j.value("bootstrap", s.bootstrap);
  s.seed = j.value("seed", s.seed);
  s.regularization = j.value("regularization", s.regularization);
  s.tripleIndex = j.value("triple", s.tripleIndex);
  return s;
}

json to_json(const analysis::Scenario& s) {
  json states = json::array();
  for (const auto& st : s.states) {
    json e{{"family", std::string(analysis::to_string(st.family))}};
    if (std::isfinite(st.width)) e["width"] = st.width;
    if (std::isfinite(st.varE)) e["varE"] = st.varE;
    states.push_back(e);
  }
  return {{"states", states},
          {"optics", to_json(s.optics)},
          {"noise", {{"seed", s.noise.seed}, {"level", s.noise.relativeLevel}}},
          {"window", {s.windowLo, s.windowHi}},
          {"bootstrap", s.bootstrap},
          {"seed", s.seed},
          {"regularization", s.regularization},
          {"triple", s.tripleIndex}};
}

json error_record(std::string_view stage, std::string_view message) {
  return {{"error", {{"stage", std::string(stage)}, {"message", std::string(message)}}}};
}

void write_spectrum_csv(std::ostream& os, const optics::MeasuredSpectrum& s, const Metadata& meta) {
  write_csv_header(os, meta);
  os.precision(17);
  os << "N,power\n";
  for (int N = s.nLo; N <= s.nHi; ++N) os << N << ',' << s.at(N) << '\n';
}

optics::MeasuredSpectrum read_spectrum_csv(std::istream& is) {
  optics::MeasuredSpectrum s;
  std::string line;
  bool header = false, first = true;
  int prev = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line.rfind("N,power", 0) != 0) throw std::invalid_argument("spectrum CSV: expected header 'N,power'");
      header = true;
      continue;
    }
    std::istringstream ls(line);
    int N = 0;
    char comma = 0;
    double p = 0.0;
    if (!(ls >> N >> comma >> p) || comma != ',') throw std::invalid_argument("spectrum CSV: bad row '" + line + "'");
    if (first) {
      s.nLo = N;
      first = false;
    } else if (N != prev + 1) {
      throw std::invalid_argument("spectrum CSV: N must be consecutive");
    }
    prev = N;
    s.power.push_back(p);
  }
  if (first) throw std::invalid_argument("spectrum CSV: no rows");
  s.nHi = prev;
  return s;
}

void write_response_csv(std::ostream& os, const optics::ResponseMatrix& C, const Metadata& meta) {
  write_csv_header(os, meta);
  os.precision(17);
  os << "N";
  for (int m = C.mLo; m <= C.mHi; ++m) os << ",m" << m;
  os << '\n';
  for (int N = C.nLo; N <= C.nHi; ++N) {
    os << N;
    for (int m = C.mLo; m <= C.mHi; ++m) os << ',' << C.at(N, m);
    os << '\n';
  }
}

void write_pipeline_csv(std::ostream& os, const analysis::PipelineResult& r, const Metadata& meta) {
  write_csv_header(os, meta);
  os << "# deconvolution: Tikhonov nonnegative least squares\n";
  os.precision(12);
  os << "family,width,varE,product_theory,product_recovered,err,width_fit,varE_fit,residual,regularization\n";
  for (const auto& row : r.rows) {
    os << row.family << ',' << row.widthParam << ',' << row.varETheory << ',' << row.productTheory << ','
       << row.productRecovered << ',' << row.errorBar << ',' << row.fittedWidth << ',' << row.varERecovered << ','
       << row.residualNorm << ',' << row.regularization << '\n';
  }
}

void write_triple_csv(std::ostream& os, const analysis::PipelineResult& r, const Metadata& meta) {
  write_csv_header(os, meta);
  os.precision(12);
  os << "m,raw,deconvolved,fitted\n";
  for (const auto& t : r.triple) os << t.m << ',' << t.raw << ',' << t.deconvolved << ',' << t.fitted << '\n';
}

}  // namespace orbita::io
