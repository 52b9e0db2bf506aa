#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "orbita/io.hpp"

namespace fs = std::filesystem;
using orbita::io::json;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "orbita");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = orbita::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("orbita_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, StateWedgeAtPi) {
  const auto r = run({"state", "--family", "wedge", "--alpha", "3.141592653589793"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_NEAR(j.at("report").at("varE").get<double>(), 0.5947, 1e-4);
  EXPECT_EQ(j.at("meta").at("version").get<std::string>(), std::string(orbita::io::kVersion));
}

TEST(Cli, StateWritesSpectrumBesideJson) {
  const auto dir = scratch("state");
  const auto r = run({"state", "--family", "vonmises", "--alpha", "0.5", "--out", (dir / "vm.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "vm.json"));
  const auto csv = slurp(dir / "vm_spectrum.csv");
  EXPECT_EQ(csv.rfind("# orbita ", 0), 0u);
  EXPECT_NE(csv.find("m,p,re,im,p_closed"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"state"}).code, 2);  // --family is required
  EXPECT_EQ(run({"reproduce", "fig5"}).code, 2);
  EXPECT_EQ(run({"--version"}).code, 0);
}

TEST(Cli, FailuresExitOneWithErrorRecord) {
  const auto r = run({"state", "--family", "wedge", "--alpha", "-1"});
  EXPECT_EQ(r.code, 1);
  const auto j = json::parse(r.err);
  EXPECT_FALSE(j.at("error").at("stage").get<std::string>().empty());
  EXPECT_FALSE(j.at("error").at("message").get<std::string>().empty());

  const auto missing = run({"analyze", "--input", "/nonexistent/spectrum.csv", "--family", "vonmises"});
  EXPECT_EQ(missing.code, 1);
  EXPECT_NO_THROW(json::parse(missing.err));
}

TEST(Cli, SweepMathieuIsMinimal) {
  const auto t = orbita::cli::matched_variance_sweep({"mathieu", "wedge", "cosine", "vonmises", "truncated"}, 60);
  ASSERT_EQ(t.rows.size(), 60u);
  std::size_t mathieu = 0;
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    if (t.columns[c] == "mathieu") mathieu = c;
  }
  ASSERT_GT(mathieu, 0u);
  for (const auto& row : t.rows) {
    for (const char* fam : {"wedge", "cosine", "vonmises", "truncated"}) {
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (t.columns[c] != fam || std::isnan(row[c])) continue;
        EXPECT_LE(row[mathieu], row[c] * (1.0 + 1e-9)) << fam << " varE " << row[0];
      }
    }
  }
}

TEST(Cli, MathieuCurvesAtSmallQ) {
  const auto t = orbita::cli::mathieu_curves(2, 20);
  ASSERT_FALSE(t.rows.empty());
  EXPECT_EQ(t.columns.front(), "q");
}

TEST(Cli, SimulateAnalyzeRoundTrip) {
  const auto dir = scratch("roundtrip");
  const auto spec = (dir / "s.csv").string();
  auto r = run({"simulate", "--family", "vonmises", "--var-e", "0.6", "--noise", "0", "--out", spec});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(spec);
  const auto s = orbita::io::read_spectrum_csv(in);
  EXPECT_EQ(s.nLo, -15);
  EXPECT_EQ(s.nHi, 15);

  r = run({"analyze", "--input", spec, "--family", "vonmises", "--bootstrap", "20", "--out",
           (dir / "fit.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(slurp(dir / "fit.json"));
  EXPECT_NEAR(j.at("fit").at("varE").get<double>(), 0.6, 1e-4);
  EXPECT_TRUE(fs::exists(dir / "fit_triple.csv"));
}

TEST(Cli, Fig9IsReproducible) {
  const auto a = scratch("fig9a"), b = scratch("fig9b");
  ASSERT_EQ(run({"reproduce", "fig9", "--seed", "7", "--bootstrap", "20", "--out", a.string()}).code, 0);
  ASSERT_EQ(run({"reproduce", "fig9", "--seed", "7", "--bootstrap", "20", "--out", b.string()}).code, 0);
  for (const char* f : {"fig9_products.csv", "fig8_triple.csv"}) {
    const auto x = slurp(a / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(b / f)) << f;
    EXPECT_NE(x.find("# seed 7"), std::string::npos) << f;
  }
}

TEST(Io, SpectrumCsvRoundTrip) {
  orbita::optics::MeasuredSpectrum s;
  s.nLo = -2;
  s.nHi = 2;
  s.power = {0.1, 0.2, 0.4, 0.2, 1.0 / 3.0};
  std::stringstream ss;
  orbita::io::write_spectrum_csv(ss, s, {3, "abc"});
  const auto t = orbita::io::read_spectrum_csv(ss);
  EXPECT_EQ(t.nLo, -2);
  EXPECT_EQ(t.power, s.power);

  std::stringstream gap("N,power\n0,1\n2,1\n");
  EXPECT_THROW(orbita::io::read_spectrum_csv(gap), std::invalid_argument);
}

TEST(Io, OpticsConfigRejectsUnknownKeys) {
  const auto c = orbita::io::optical_config_from_json(json::parse(R"({"R": 2e-5, "grid": {"samples": 1024}})"));
  EXPECT_EQ(c.aperture, 2e-5);
  EXPECT_EQ(c.radialSamples, 1024);
  EXPECT_THROW(orbita::io::optical_config_from_json(json::parse(R"({"aperture": 2e-5})")), std::invalid_argument);
  EXPECT_THROW(orbita::io::optical_config_from_json(json::parse(R"({"z": 0})")), std::invalid_argument);
  const auto back = orbita::io::optical_config_from_json(orbita::io::to_json(c));
  EXPECT_EQ(back.aperture, c.aperture);
}

TEST(Io, ConfigHashIsStable) {
  const auto j = json::parse(R"({"a": 1, "b": [2, 3]})");
  EXPECT_EQ(orbita::io::config_hash(j), orbita::io::config_hash(json::parse(j.dump())));
  EXPECT_EQ(orbita::io::config_hash(j).size(), 16u);
  EXPECT_EQ(orbita::io::fnv1a(""), 0xcbf29ce484222325ULL);
}
