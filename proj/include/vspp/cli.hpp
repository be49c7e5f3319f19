#pragma once

// Scenario runner: JSON configuration, parameter sweeps over dotted config
// paths, and CSV/JSON output.

#include <json.hpp>
#include <string>
#include <vector>

#include "vspp/cavity.hpp"
#include "vspp/errors.hpp"
#include "vspp/media.hpp"
#include "vspp/numerics.hpp"

namespace vspp::cli {

/// Configuration problems (exit code 1).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or unwritable files (exit code 3).
class IoError : public Error {
 public:
  using Error::Error;
};

enum class Scenario { DispersionSweep, MultilayerSweep, CavityModes, Creation, Compare };
enum class Format { CSV, JSON };

const char* scenario_name(Scenario s);

struct SweepAxis {
  std::string name;  ///< dotted path of a numeric config key, e.g. "drive.kappa" or "regions.0.eps"
  double start = 0.0;
  double stop = 0.0;
  int count = 1;
  bool log = false;

  std::vector<double> values() const;
};

struct OutputSpec {
  std::string path;  ///< empty: standard output
  Format format = Format::CSV;
};

struct ScenarioConfig {
  Scenario scenario = Scenario::Compare;
  nlohmann::json tree;  ///< complete tree with defaults filled in; sweep points are edits of it
  double c = 0.0;
  cavity::Geometry geometry;
  media::RegionStack regions;
  media::ModulationProfile drive;
  numerics::IntegratorConfig numerics;
  std::vector<SweepAxis> sweep;
  OutputSpec output;
  int threads = 1;
};

/// Default tree for a scenario (SI units; the compare defaults use the
/// reference cavity, R = 0.025 m, L = 0.1 m, a/L = 1e-4).
nlohmann::json default_tree(Scenario s);

/// Scenario from its command name: dispersion, multilayer, cavity, create, compare.
Scenario parse_scenario(const std::string& name);

/// Merge `user` over the defaults of its scenario, apply "key=value"
/// overrides (dotted paths, JSON values) and validate.
ScenarioConfig build_config(const nlohmann::json& user, const std::vector<std::string>& overrides = {});

/// Read a JSON file and build_config it. Parse errors report line and column.
ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

struct RunRecord {
  std::string scenario;
  std::string config_hash;
  std::string timestamp;
  std::string tool_version;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> warnings;
};

/// Hex FNV-1a hash of the canonical config, excluding output and threads.
std::string config_hash(const ScenarioConfig& cfg);

/// Evaluate every sweep point (cartesian product of the axes) on `threads`
/// workers; rows come back in sweep order. Solver failures are rethrown as
/// vspp::Error annotated with the sweep point.
RunRecord run(const ScenarioConfig& cfg);

std::string to_csv(const RunRecord& r);
nlohmann::json to_json(const RunRecord& r);
RunRecord from_json(const nlohmann::json& j);

/// Write in the given format to path, or to stdout when path is empty.
void emit(const RunRecord& r, Format format, const std::string& path);

/// Writes the cavity scenario's field map (if configured) for the first sweep point.
void emit_field_map(const ScenarioConfig& cfg);

/// Command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace vspp::cli
