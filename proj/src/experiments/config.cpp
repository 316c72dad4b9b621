#include "fsplab/config.hpp"

#include "fsplab/ops.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace fsp {

namespace {

const std::pair<ExperimentKind, const char*> kind_names[] = {
    {ExperimentKind::barenblatt_fit, "barenblatt-fit"},
    {ExperimentKind::halfspace_fsp, "halfspace-fsp"},
    {ExperimentKind::fluid2d_taylor_green, "fluid2d-taylor-green"},
    {ExperimentKind::fluid2d_halfplane, "fluid2d-halfplane"},
    {ExperimentKind::energy_ledger, "energy-ledger"},
    {ExperimentKind::lemma_a1_suite, "lemma-a1-suite"},
    {ExperimentKind::lemma_a2_suite, "lemma-a2-suite"},
    {ExperimentKind::exponent_identities, "exponent-identities"},
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::optional<std::string> to_real(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) return "expected a real number, got '" + text + "'";
  if (!std::isfinite(out)) return "expected a finite real number, got '" + text + "'";
  return std::nullopt;
}

template <class Int>
std::optional<std::string> to_int(const std::string& text, Int& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) return "expected an integer, got '" + text + "'";
  return std::nullopt;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) items.push_back(trim(item));
  return items;
}

using Setter = std::function<std::optional<std::string>(ExperimentConfig&, const std::string&)>;

struct KeySpec {
  const char* name;
  const char* fallback;
  const char* doc;
  Setter set;
};

Setter real(double ExperimentConfig::*m) {
  return [m](ExperimentConfig& c, const std::string& v) { return to_real(v, c.*m); };
}

Setter optional_real(std::optional<double> ExperimentConfig::*m) {
  return [m](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
    if (v == "none" || v == "auto") {
      c.*m = std::nullopt;
      return std::nullopt;
    }
    double x = 0;
    if (auto e = to_real(v, x)) return e;
    c.*m = x;
    return std::nullopt;
  };
}

Setter integer(int ExperimentConfig::*m) {
  return [m](ExperimentConfig& c, const std::string& v) { return to_int(v, c.*m); };
}

Setter text(std::string ExperimentConfig::*m, std::vector<std::string> allowed) {
  return [m, allowed](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      return "expected one of {" + list + "}, got '" + v + "'";
    }
    c.*m = v;
    return std::nullopt;
  };
}

Setter boolean(bool ExperimentConfig::*m) {
  return [m](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
    if (v == "true" || v == "1" || v == "yes") c.*m = true;
    else if (v == "false" || v == "0" || v == "no") c.*m = false;
    else return "expected true or false, got '" + v + "'";
    return std::nullopt;
  };
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"experiment", "", "experiment kind (required)",
       [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
         const auto k = parse_experiment_kind(v);
         if (!k) {
           std::string list;
           for (const auto& [kind, name] : kind_names) list += (list.empty() ? "" : ", ") + std::string(name);
           return "unknown experiment '" + v + "', expected one of {" + list + "}";
         }
         c.kind = *k;
         return std::nullopt;
       }},
      {"p", "3", "power-law exponent", real(&ExperimentConfig::p)},
      {"mu1", "1", "viscosity coefficient", real(&ExperimentConfig::mu1)},
      {"dim", "1", "space dimension N (1 or 2)", integer(&ExperimentConfig::dim)},
      {"cells", "1024", "cells per axis", integer(&ExperimentConfig::cells)},
      {"cells_list", "", "comma-separated cells per axis for refinement studies",
       [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
         c.cells_list.clear();
         if (v.empty()) return std::nullopt;
         for (const auto& item : split_list(v)) {
           int n = 0;
           if (auto e = to_int(item, n)) return e;
           c.cells_list.push_back(n);
         }
         return std::nullopt;
       }},
      {"box", "8", "half-width L of the box [-L, L]^N", real(&ExperimentConfig::box)},
      {"t_start", "1", "time of the Barenblatt initial data", real(&ExperimentConfig::t_start)},
      {"t_end", "10", "final time", real(&ExperimentConfig::t_end)},
      {"snapshots", "60", "stored snapshots", integer(&ExperimentConfig::snapshots)},
      {"schedule", "log", "snapshot spacing (log or uniform)", text(&ExperimentConfig::schedule, {"log", "uniform"})},
      {"schedule_from", "0.01", "first snapshot time after the start (log schedules)", real(&ExperimentConfig::schedule_from)},
      {"stepper", "explicit", "scalar time stepper (explicit or implicit)", text(&ExperimentConfig::stepper, {"explicit", "implicit"})},
      {"safety", "0.9", "explicit CFL safety factor", real(&ExperimentConfig::safety)},
      {"dt_multiplier", "100", "implicit step as a multiple of the explicit CFL step", real(&ExperimentConfig::dt_multiplier)},
      {"tol", "1e-10", "implicit inner residual tolerance", real(&ExperimentConfig::tol)},
      {"max_inner", "100", "implicit inner iteration cap", integer(&ExperimentConfig::max_inner)},
      {"eps_reg", "0", "diffusivity regularization", real(&ExperimentConfig::eps_reg)},
      {"sentinel_margin", "0.1", "guard band as a fraction of the box length", real(&ExperimentConfig::sentinel_margin)},
      {"bump_width", "0.04", "width of the half-space bump", real(&ExperimentConfig::bump_width)},
      {"bump_amplitude", "20", "height of the half-space bump", real(&ExperimentConfig::bump_amplitude)},
      {"tau", "1e-6", "support threshold", real(&ExperimentConfig::tau)},
      {"fit_drop", "0.1", "fraction of samples dropped at each end of a fit", real(&ExperimentConfig::fit_drop)},
      {"fit_t_min", "none", "fit window start", optional_real(&ExperimentConfig::fit_t_min)},
      {"fit_t_max", "none", "fit window end", optional_real(&ExperimentConfig::fit_t_max)},
      {"expected_exponent", "auto", "target exponent (auto: 1/(p+N(p-2)))", optional_real(&ExperimentConfig::expected_exponent)},
      {"exponent_tol", "0.05", "relative tolerance on the exponent", real(&ExperimentConfig::exponent_tol)},
      {"min_order", "0.8", "minimum empirical convergence order", real(&ExperimentConfig::min_order)},
      {"t_ref", "0.1", "envelope calibration time", real(&ExperimentConfig::t_ref)},
      {"envelope_tol", "0.02", "relative envelope slack", real(&ExperimentConfig::envelope_tol)},
      {"l1_tol", "1e-6", "allowed relative L1 growth", real(&ExperimentConfig::l1_tol)},
      {"advection", "upwind", "fluid advection (upwind or central)", text(&ExperimentConfig::advection, {"upwind", "central"})},
      {"fluid_safety", "0.4", "fluid CFL safety factor", real(&ExperimentConfig::fluid_safety)},
      {"fluid_eps", "auto", "fluid viscosity regularization (auto: h)", optional_real(&ExperimentConfig::fluid_eps)},
      {"rate_tol", "0.02", "relative tolerance on the kinetic energy decay rate", real(&ExperimentConfig::rate_tol)},
      {"div_tol", "1e-10", "bound on max |div u|", real(&ExperimentConfig::div_tol)},
      {"test_fields", "20", "random divergence-free test fields", integer(&ExperimentConfig::test_fields)},
      {"weak_min_order", "1", "minimum order of the weak residual", real(&ExperimentConfig::weak_min_order)},
      {"band_width", "0.6", "width of the half-plane shear band", real(&ExperimentConfig::band_width)},
      {"s_step", "0.125", "spacing of the (s, delta) grid", real(&ExperimentConfig::s_step)},
      {"calib_s_step", "0.02", "s spacing of the c~ calibration", real(&ExperimentConfig::calib_s_step)},
      {"calib_delta_min", "0.01", "smallest calibration delta", real(&ExperimentConfig::calib_delta_min)},
      {"calib_delta_max", "4", "largest calibration delta", real(&ExperimentConfig::calib_delta_max)},
      {"deltas", "0.125,0.25,0.5,1", "comma-separated delta values",
       [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
         c.deltas.clear();
         for (const auto& item : split_list(v)) {
           double d = 0;
           if (auto e = to_real(item, d)) return e;
           c.deltas.push_back(d);
         }
         return std::nullopt;
       }},
      {"growth_tol", "1.5", "allowed growth of calibrated constants under refinement", real(&ExperimentConfig::growth_tol)},
      {"iteration_eps", "0.5", "epsilon of the J iteration", real(&ExperimentConfig::iteration_eps)},
      {"j_constant", "auto", "2c~ of J (auto: calibrated)", optional_real(&ExperimentConfig::j_constant)},
      {"cases", "200", "synthetic cases of the iteration suite", integer(&ExperimentConfig::cases)},
      {"ratio_factor", "2", "allowed change of the interpolation ratio under refinement", real(&ExperimentConfig::ratio_factor)},
      {"dilation_tol", "0.01", "relative tolerance of the dilation check", real(&ExperimentConfig::dilation_tol)},
      {"bump_count", "100", "random bumps of the interpolation suite", integer(&ExperimentConfig::bump_count)},
      {"identity_tol", "1e-12", "tolerance of the exponent identities", real(&ExperimentConfig::identity_tol)},
      {"criteria", "", "comma-separated acceptance criteria decided by this file",
       [](ExperimentConfig& c, const std::string& v) -> std::optional<std::string> {
         c.criteria.clear();
         if (v.empty()) return std::nullopt;
         for (const auto& item : split_list(v)) {
           int n = 0;
           if (auto e = to_int(item, n)) return e;
           c.criteria.push_back(n);
         }
         return std::nullopt;
       }},
      {"runtime_budget", "120", "acceptance runtime budget in seconds", real(&ExperimentConfig::runtime_budget)},
      {"seed", "1", "random seed",
       [](ExperimentConfig& c, const std::string& v) { return to_int(v, c.seed); }},
      {"output", "out", "output directory", text(&ExperimentConfig::output, {})},
      {"plot", "true", "write SVG plots", boolean(&ExperimentConfig::plot)},
  };
  return table;
}

const KeySpec* find_key(const std::string& name) {
  for (const auto& k : key_table())
    if (name == k.name) return &k;
  return nullptr;
}

bool finite_speed(ExperimentKind k) {
  return k == ExperimentKind::barenblatt_fit || k == ExperimentKind::halfspace_fsp || k == ExperimentKind::energy_ledger ||
         k == ExperimentKind::fluid2d_halfplane;
}

struct Issue {
  std::string key;
  std::string message;
};

std::vector<Issue> check_ranges(const ExperimentConfig& c) {
  std::vector<Issue> out;
  auto need = [&](bool ok, const char* key, std::string msg) {
    if (!ok) out.push_back({key, std::move(msg)});
  };
  auto num = [](double v) {
    std::ostringstream s;
    s << v;
    return s.str();
  };
  const ExperimentKind k = c.kind;
  if (finite_speed(k))
    need(c.p > 2.0, "p", "p must be > 2 for a finite-speed experiment, got " + num(c.p));
  else
    need(c.p >= 2.0, "p", "p must be >= 2, got " + num(c.p));
  if (k == ExperimentKind::fluid2d_taylor_green)
    need(c.p == 2.0, "p", "the Taylor-Green reduction needs p = 2, got " + num(c.p));
  need(c.mu1 > 0.0, "mu1", "mu1 must be > 0, got " + num(c.mu1));
  need(c.dim == 1 || c.dim == 2, "dim", "dim must be 1 or 2, got " + std::to_string(c.dim));
  if (k == ExperimentKind::fluid2d_taylor_green || k == ExperimentKind::fluid2d_halfplane)
    need(c.dim == 2, "dim", "fluid experiments are two-dimensional, got dim = " + std::to_string(c.dim));
  if (k == ExperimentKind::halfspace_fsp || k == ExperimentKind::energy_ledger)
    need(c.dim == 1, "dim", "half-space runs are one-dimensional, got dim = " + std::to_string(c.dim));
  need(c.cells >= 8, "cells", "cells must be >= 8, got " + std::to_string(c.cells));
  for (int n : c.cells_list) need(n >= 8, "cells_list", "every cells_list entry must be >= 8, got " + std::to_string(n));
  for (std::size_t i = 1; i < c.cells_list.size(); ++i)
    need(c.cells_list[i] > c.cells_list[i - 1], "cells_list", "cells_list must be increasing");
  need(c.box > 0.0, "box", "box must be > 0, got " + num(c.box));
  need(c.t_start >= 0.0, "t_start", "t_start must be >= 0, got " + num(c.t_start));
  if (k == ExperimentKind::barenblatt_fit) need(c.t_start > 0.0, "t_start", "Barenblatt data need t_start > 0");
  // only Barenblatt runs start at t_start; the others start at 0
  const double t0 = k == ExperimentKind::barenblatt_fit ? c.t_start : 0.0;
  need(c.t_end > t0, "t_end", "t_end must exceed the start time (" + num(t0) + "), got " + num(c.t_end));
  need(c.snapshots >= 2, "snapshots", "snapshots must be >= 2, got " + std::to_string(c.snapshots));
  need(c.schedule_from > 0.0 && c.schedule_from < c.t_end - t0, "schedule_from",
       "schedule_from must lie in (0, t_end - start), got " + num(c.schedule_from));
  need(c.safety > 0.0 && c.safety <= 1.0, "safety", "safety must lie in (0, 1], got " + num(c.safety));
  need(c.dt_multiplier >= 1.0, "dt_multiplier", "dt_multiplier must be >= 1, got " + num(c.dt_multiplier));
  need(c.tol > 0.0, "tol", "tol must be > 0, got " + num(c.tol));
  need(c.max_inner >= 1, "max_inner", "max_inner must be >= 1");
  need(c.eps_reg >= 0.0, "eps_reg", "eps_reg must be >= 0, got " + num(c.eps_reg));
  need(c.sentinel_margin >= 0.0 && c.sentinel_margin < 0.5, "sentinel_margin", "sentinel_margin must lie in [0, 0.5)");
  need(c.bump_width > 0.0 && c.bump_width < c.box, "bump_width", "bump_width must lie in (0, box)");
  need(c.bump_amplitude > 0.0, "bump_amplitude", "bump_amplitude must be > 0");
  need(c.tau > 0.0, "tau", "tau must be > 0, got " + num(c.tau));
  need(c.fit_drop >= 0.0 && c.fit_drop < 0.5, "fit_drop", "fit_drop must lie in [0, 0.5)");
  if (c.fit_t_min && c.fit_t_max) need(*c.fit_t_max > *c.fit_t_min, "fit_t_max", "fit_t_max must exceed fit_t_min");
  need(c.exponent_tol > 0.0, "exponent_tol", "exponent_tol must be > 0");
  need(c.min_order > 0.0, "min_order", "min_order must be > 0");
  need(c.t_ref > 0.0, "t_ref", "t_ref must be > 0");
  need(c.envelope_tol >= 0.0, "envelope_tol", "envelope_tol must be >= 0");
  need(c.l1_tol >= 0.0, "l1_tol", "l1_tol must be >= 0");
  need(c.fluid_safety > 0.0 && c.fluid_safety <= 1.0, "fluid_safety", "fluid_safety must lie in (0, 1]");
  if (c.fluid_eps) need(*c.fluid_eps >= 0.0, "fluid_eps", "fluid_eps must be >= 0");
  need(c.rate_tol > 0.0, "rate_tol", "rate_tol must be > 0");
  need(c.div_tol > 0.0, "div_tol", "div_tol must be > 0");
  need(c.test_fields >= 1, "test_fields", "test_fields must be >= 1");
  need(c.band_width > 0.0, "band_width", "band_width must be > 0");
  need(c.s_step > 0.0, "s_step", "s_step must be > 0");
  need(c.calib_s_step > 0.0, "calib_s_step", "calib_s_step must be > 0");
  need(c.calib_delta_min > 0.0, "calib_delta_min", "calib_delta_min must be > 0");
  need(c.calib_delta_max > c.calib_delta_min, "calib_delta_max", "calib_delta_max must exceed calib_delta_min");
  need(!c.deltas.empty(), "deltas", "deltas must not be empty");
  for (double d : c.deltas) need(d > 0.0, "deltas", "every delta must be > 0, got " + num(d));
  need(c.growth_tol >= 1.0, "growth_tol", "growth_tol must be >= 1");
  need(c.iteration_eps > 0.0 && c.iteration_eps < 1.0, "iteration_eps", "iteration_eps must lie in (0, 1)");
  if (c.j_constant) need(*c.j_constant > 0.0, "j_constant", "j_constant must be > 0");
  need(c.cases >= 1, "cases", "cases must be >= 1");
  need(c.ratio_factor >= 1.0, "ratio_factor", "ratio_factor must be >= 1");
  need(c.dilation_tol > 0.0, "dilation_tol", "dilation_tol must be > 0");
  need(c.bump_count >= 1, "bump_count", "bump_count must be >= 1");
  need(c.identity_tol > 0.0, "identity_tol", "identity_tol must be > 0");
  need(c.runtime_budget > 0.0, "runtime_budget", "runtime_budget must be > 0");
  need(!c.output.empty(), "output", "output must not be empty");
  return out;
}

} // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kind_names)
    if (k == kind) return name;
  return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& text) {
  for (const auto& [k, name] : kind_names)
    if (text == name) return k;
  return std::nullopt;
}

namespace {

std::string join_errors(const std::vector<std::string>& errors) {
  std::string s = "invalid config:";
  for (const auto& e : errors) s += "\n  " + e;
  return s;
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> errors) : InvalidArgument(join_errors(errors)), errors_(std::move(errors)) {}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& spec : key_table()) k.push_back(spec.name);
    return k;
  }();
  return keys;
}

std::string config_reference() {
  std::ostringstream s;
  for (const auto& k : key_table()) s << "# " << k.doc << '\n' << k.name << " = " << k.fallback << '\n';
  return s.str();
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& i : check_ranges(cfg)) out.push_back(i.key + ": " + i.message);
  return out;
}

ExperimentConfig parse_config(const std::string& source, const std::map<std::string, std::string>& overrides) {
  std::vector<std::string> errors;
  std::map<std::string, std::pair<std::string, int>> values; // key -> (value, line)
  std::istringstream in(source);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line) + ": expected 'key = value', got '" + body + "'");
      continue;
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(line) + ": missing key before '='");
      continue;
    }
    if (!find_key(key)) {
      errors.push_back("line " + std::to_string(line) + ": unknown key '" + key + "'");
      continue;
    }
    if (auto it = values.find(key); it != values.end()) {
      errors.push_back("line " + std::to_string(line) + ": duplicate key '" + key + "' (first set on line " +
                       std::to_string(it->second.second) + ")");
      continue;
    }
    values[key] = {value, line};
  }
  for (const auto& [key, value] : overrides) {
    if (!find_key(key)) {
      errors.push_back("flag --" + key + ": unknown key");
      continue;
    }
    values[key] = {value, 0};
  }
  auto where = [&](const std::string& key) {
    const auto it = values.find(key);
    if (it == values.end()) return std::string("default");
    return it->second.second == 0 ? "flag --" + key : "line " + std::to_string(it->second.second);
  };

  ExperimentConfig cfg;
  if (!values.count("experiment")) errors.push_back("missing required key 'experiment'");
  std::vector<std::string> failed;
  for (const auto& spec : key_table()) {
    const auto it = values.find(spec.name);
    if (it == values.end()) {
      cfg.echo[spec.name] = spec.fallback;
      continue;
    }
    if (auto e = spec.set(cfg, it->second.first)) {
      errors.push_back(where(spec.name) + ": " + spec.name + ": " + *e);
      failed.push_back(spec.name);
    }
    cfg.echo[spec.name] = it->second.first;
  }
  for (const auto& i : check_ranges(cfg))
    if (std::find(failed.begin(), failed.end(), i.key) == failed.end())
      errors.push_back(where(i.key) + ": " + i.key + ": " + i.message);
  if (!errors.empty()) throw ConfigError(errors);
  return cfg;
}

ExperimentConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

} // namespace fsp
