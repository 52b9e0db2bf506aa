#pragma once

// JSON and CSV serialization. Every output file starts with a metadata block:
// CSV gets '#'-prefixed lines, JSON a "meta" object.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include "json.hpp"
#include "orbita/analysis.hpp"
#include "orbita/optics.hpp"
#include "orbita/states.hpp"

namespace orbita::io {

using json = nlohmann::json;

inline constexpr std::string_view kVersion = ORBITA_VERSION;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
/// Hash of the compact dump of a JSON document, as 16 hex digits.
std::string config_hash(const json& config);

struct Metadata {
  std::uint64_t seed = 0;
  std::string configHash;
};

void write_csv_header(std::ostream& os, const Metadata& meta);
json meta_json(const Metadata& meta);

json to_json(const UncertaintyReport& r);
json to_json(const states::StatePackage& pkg);
json to_json(const optics::OpticalConfig& cfg);
json to_json(const analysis::FitResult& fit);

/// Keys: wavelength, waist, z, focal, R, grid {samples, rMaxFactor},
/// helicity [lo, hi], modeMargin. Missing keys keep their defaults; unknown
/// keys are rejected.
optics::OpticalConfig optical_config_from_json(const json& j);
optics::OpticalConfig load_optical_config(const std::string& path);

/// { states: [{family, width | varE}], optics, noise {seed, level}, window [lo, hi],
///   bootstrap, seed, regularization, triple }
analysis::Scenario scenario_from_json(const json& j);
json to_json(const analysis::Scenario& s);

json error_record(std::string_view stage, std::string_view message);

void write_spectrum_csv(std::ostream& os, const optics::MeasuredSpectrum& s, const Metadata& meta);
optics::MeasuredSpectrum read_spectrum_csv(std::istream& is);
void write_response_csv(std::ostream& os, const optics::ResponseMatrix& C, const Metadata& meta);
void write_pipeline_csv(std::ostream& os, const analysis::PipelineResult& r, const Metadata& meta);
void write_triple_csv(std::ostream& os, const analysis::PipelineResult& r, const Metadata& meta);

}  // namespace orbita::io
