#pragma once

#include <optional>
#include <string>
#include <vector>

#include "terralab/config.hpp"
#include "terralab/diagnostics.hpp"
#include "terralab/potential.hpp"
#include "terralab/radial.hpp"

namespace terralab {

// A fully validated experiment assembled from a Config: potential + analysis,
// grid, integrator, initial state, and the reference (outer) minimum.
struct Experiment {
  PotentialSpec spec;
  Box box;
  PotentialAnalysis analysis;
  RadialGrid grid;
  IntegratorConfig integ;
  RadialField initial;
  int m_ref_index = 0;  // index into analysis.minima of the outer state
};

// Throws ConfigError naming the offending key on any validation failure,
// including keys that are present but never consumed.
Experiment build_experiment(const Config& cfg);

struct RunResult {
  std::string out_dir;
  std::string manifest_path;
  std::vector<std::string> snapshot_paths;
  std::vector<std::string> warnings;
};

// Run the configured scenario, writing snapshots, the configured observer
// CSVs, and manifest.json (grid, file list, warnings, exact config echo)
// into out_dir. Deterministic: identical config -> byte-identical outputs.
RunResult run_experiment(const Config& cfg, const std::string& out_dir);

// Shared helper: resolve a config-supplied state (list of n reals) to the
// nearest minimum of the analysis within a snap distance, so configs may
// write "1" for an exact Newton-refined minimum at 1.0.
int snap_to_minimum(const PotentialAnalysis& analysis,
                    const std::vector<double>& approx, double snap_tol = 0.15);

}  // namespace terralab
