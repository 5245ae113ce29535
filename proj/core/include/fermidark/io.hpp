#pragma once

// Config parsing (JSON) and artifact writers (CSV/JSON). Half-integers are
// accepted as strings ("9/2", "3"), plain numbers (must be integers), or
// objects {"twice": n} for exact transport. Every artifact embeds the tool
// version and the resolved configuration.

#include "fermidark/darkcensus.hpp"
#include "fermidark/dipolar.hpp"
#include "fermidark/dynamics.hpp"
#include "fermidark/spectrum.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>

namespace fermidark {

// Thrown on malformed configuration input; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

HalfInt parse_half_int(const nlohmann::json& j);

// Polarization vectors: "e+" / "e0" / "e-" (unit spherical about z), "ex" /
// "ey" / "ez" (Cartesian), or an array of three [re, im] pairs (normalized).
Eigen::Vector3cd parse_polarization(const nlohmann::json& j);

LevelStructure parse_level_structure(const nlohmann::json& j);
ExperimentConfig parse_experiment_config(const nlohmann::json& j);

nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

void write_timeseries_csv(const std::filesystem::path& path,
                          const TimeSeries& series);
void write_timeseries_json(const std::filesystem::path& path,
                           const TimeSeries& series,
                           const nlohmann::json& config_echo);

void write_spectrum_csv(const std::filesystem::path& path,
                        const SpectrumReport& report);
void write_spectrum_json(const std::filesystem::path& path,
                         const SpectrumReport& report,
                         const nlohmann::json& config_echo);

void write_census_csv(const std::filesystem::path& path,
                      const CensusVerification& verification,
                      const LevelStructure& ls, int n);
void write_census_json(const std::filesystem::path& path,
                       const CensusVerification& verification,
                       const LevelStructure& ls, int n,
                       const nlohmann::json& config_echo);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string output_dir;
  unsigned long seed = 0;
  std::string tool_version;
};

void write_manifest(const std::filesystem::path& path, const RunManifest& m);

}  // namespace fermidark
