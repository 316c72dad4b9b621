#pragma once

#include "fsplab/error.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fsp {

enum class ExperimentKind {
  barenblatt_fit,
  halfspace_fsp,
  fluid2d_taylor_green,
  fluid2d_halfplane,
  energy_ledger,
  lemma_a1_suite,
  lemma_a2_suite,
  exponent_identities
};

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& text);

/// All errors of one parse, each prefixed with its line number.
class ConfigError : public InvalidArgument {
public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
  std::vector<std::string> errors_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::barenblatt_fit;

  // model
  double p = 3.0;
  double mu1 = 1.0;
  int dim = 1;

  // grid: [-box, box]^dim; refinement studies run every entry of cells_list
  int cells = 1024;
  std::vector<int> cells_list;
  double box = 8.0;

  // time
  double t_start = 1.0;
  double t_end = 10.0;
  int snapshots = 60;
  std::string schedule = "log";
  double schedule_from = 0.01;

  // scalar solver
  std::string stepper = "explicit";
  double safety = 0.9;
  double dt_multiplier = 100.0;
  double tol = 1e-10;
  int max_inner = 100;
  double eps_reg = 0.0;
  double sentinel_margin = 0.1;

  // initial data of half-space runs
  double bump_width = 0.04;
  double bump_amplitude = 20.0;

  // fronts and fits
  double tau = 1e-6;
  double fit_drop = 0.1;
  std::optional<double> fit_t_min;
  std::optional<double> fit_t_max;
  std::optional<double> expected_exponent;
  double exponent_tol = 0.05;
  double min_order = 0.8;
  double t_ref = 0.1;
  double envelope_tol = 0.02;
  double l1_tol = 1e-6;

  // fluid
  std::string advection = "upwind";
  double fluid_safety = 0.4;
  std::optional<double> fluid_eps;
  double rate_tol = 0.02;
  double div_tol = 1e-10;
  int test_fields = 20;
  double weak_min_order = 1.0;
  double band_width = 0.6;

  // energetics
  double s_step = 0.125;
  double calib_s_step = 0.02;
  double calib_delta_min = 0.01;
  double calib_delta_max = 4.0;
  std::vector<double> deltas = {0.125, 0.25, 0.5, 1.0};
  double growth_tol = 1.5;
  double iteration_eps = 0.5;
  /// 2c̃ of J; nullopt calibrates it from the run
  std::optional<double> j_constant;

  // lemma suites
  int cases = 200;
  double ratio_factor = 2.0;
  double dilation_tol = 0.01;
  int bump_count = 100;
  double identity_tol = 1e-12;

  // acceptance runner: criteria this file decides, budget in seconds
  std::vector<int> criteria;
  double runtime_budget = 120.0;

  std::uint64_t seed = 1;
  std::string output = "out";
  bool plot = true;

  /// keys as written in the source text, for the manifest echo
  std::map<std::string, std::string> echo;
};

/// Documented key list with defaults, `key = value` one per line.
std::string config_reference();

/// `key = value` lines, `#` comments. `overrides` replace (or add) keys
/// after parsing. Throws ConfigError listing every problem found.
ExperimentConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides = {});
ExperimentConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});

/// Range checks of the modules each experiment uses. Returns messages.
std::vector<std::string> validate(const ExperimentConfig& cfg);

/// Every key of the grammar.
const std::vector<std::string>& config_keys();

} // namespace fsp
