#pragma once

#include <string>
#include <vector>

#include "geolab/report.hpp"

namespace geolab {

inline const std::vector<std::string>& cli_commands() {
  static const std::vector<std::string> names{"find-geodesics", "index",         "network",       "split-vertex",
                                              "extend-field",   "sweepout-bound", "mk-experiment", "ellipsoid-experiment"};
  return names;
}

/// Fully resolved run configuration: every default filled in, so the JSON
/// form is what reports embed.
struct RunConfig {
  std::string command;
  Json surface;
  std::uint64_t seed = 1;
  double tol = 1e-10;  // shooting closure tolerance
  int grid = 1024;     // Jacobi grid size
  std::string out = ".";
  Json params;

  Json to_json() const;
};

/// Merges `overrides` over `file_config` (flags win) and validates the
/// result. Accepted top-level keys: command, surface, seed, tol, grid, out,
/// params, plus the shorthands k, mu (M_k) and a (ellipsoid). Throws
/// ConfigInvalid.
RunConfig resolve_config(const Json& file_config, const Json& overrides = Json::object());

Surface surface_from_spec(const Json& spec);

struct OutputFile {
  std::string name;
  std::string content;
};

struct RunOutput {
  int exit_code = 0;  // 0 success, 2 property check failed, 1 error
  Json report;
  std::vector<OutputFile> files;  // report JSON first
};

/// Runs one command without touching the file system. Module errors become
/// a structured error report with exit code 1.
RunOutput run(const RunConfig& config);

/// Writes every output file under config.out (created if missing).
void write_outputs(const RunConfig& config, const RunOutput& output);

/// Command-line entry point.
int run_cli(int argc, char** argv);

}  // namespace geolab
