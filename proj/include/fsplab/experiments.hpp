#pragma once

#include "fsplab/config.hpp"
#include "fsplab/field.hpp"
#include "fsplab/trajectory.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fsp {

/// Process exit codes of the command line tool.
enum ExitCode : int { exit_ok = 0, exit_invalid_config = 1, exit_numerical = 2, exit_verification = 3 };

struct Check {
  std::string name;
  /// acceptance criteria the check decides
  std::vector<int> criteria;
  bool passed = false;
  std::string detail;
};

struct ExperimentResult {
  ExperimentKind kind = ExperimentKind::barenblatt_fit;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> artifacts;
  double seconds = 0;

  bool passed() const;
};

/// 0 quiet, 1 progress (default), 2 detail; read from FSP_VERBOSITY.
int verbosity();
std::ostream& log_stream(int level);

/// Runs the experiment and writes its artifacts plus `manifest.txt` under
/// cfg.output. Throws InvalidArgument, NumericalFailure or VerificationFailure.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// run_experiment with exceptions mapped to exit codes; failed checks give
/// exit_verification. Messages go to `err`.
int run_experiment_status(const ExperimentConfig& cfg, std::ostream& err, ExperimentResult* result = nullptr);

/// Smooth half-space data: A (1 - r²)⁴ for |r| < 1, r = (x_N + w/2)/(w/2),
/// supported in [-w, 0] along the last axis.
ScalarField halfspace_bump(const GridSpec& grid, double width, double amplitude);

/// Half-space run shared by the envelope and energy experiments: explicit
/// stepping from t = 0 with snapshots at t = 0 and a log schedule.
ScalarTrajectory run_halfspace(const ExperimentConfig& cfg, int cells);

/// Writes manifest.txt: config echo, versions, and one timing line.
void write_manifest(const std::filesystem::path& path, const ExperimentConfig& cfg, const ExperimentResult& result);

} // namespace fsp
