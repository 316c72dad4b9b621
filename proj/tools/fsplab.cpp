#include "fsplab/config.hpp"
#include "fsplab/experiments.hpp"
#include "fsplab/fronts.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace fsp;

namespace {

struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> values;

  void attach(CLI::App* cmd) {
    cmd->add_option("-c,--config", file, "config file (key = value lines)")->check(CLI::ExistingFile);
    for (const auto& key : config_keys()) cmd->add_option("--" + key, values[key], "config key '" + key + "'");
  }

  std::map<std::string, std::string> overrides() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : values)
      if (!v.empty()) out[k] = v;
    return out;
  }

  std::string text() const {
    if (file.empty()) return "";
    std::ifstream in(file);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

bool sets_experiment(const std::string& text) {
  static const std::regex line(R"(^\s*experiment\s*=)");
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);)
    if (std::regex_search(l, line)) return true;
  return false;
}

/// Config from file plus flags; `fallback` names the kind when neither sets it,
/// `allowed` restricts the kinds a subcommand runs.
int run_command(const ConfigFlags& flags, const std::string& fallback, const std::set<std::string>& allowed) {
  try {
    const std::string text = flags.text();
    auto over = flags.overrides();
    if (!fallback.empty() && !over.count("experiment") && !sets_experiment(text)) over["experiment"] = fallback;
    const ExperimentConfig cfg = parse_config(text, over);
    if (!allowed.empty() && !allowed.count(to_string(cfg.kind))) {
      std::cerr << "experiment '" << to_string(cfg.kind) << "' is not run by this subcommand\n";
      return exit_invalid_config;
    }
    ExperimentResult res;
    const int code = run_experiment_status(cfg, std::cerr, &res);
    for (const auto& c : res.checks) std::cout << (c.passed ? "pass  " : "FAIL  ") << c.name << ": " << c.detail << '\n';
    return code;
  } catch (const ConfigError& e) {
    for (const auto& m : e.errors()) std::cerr << "config: " << m << '\n';
    return exit_invalid_config;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return exit_invalid_config;
  }
}

int fit_command(const std::string& trace, const FitWindow& window, std::optional<double> expected, double tol) {
  std::ifstream in(trace);
  if (!in) {
    std::cerr << "cannot read " << trace << '\n';
    return exit_invalid_config;
  }
  try {
    const ExponentFit fit = fit_exponent(read_trace_csv(in), window);
    std::cout << fit_report(fit);
    if (expected) {
      const double rel = std::abs(fit.slope - *expected) / std::abs(*expected);
      std::cout << "expected=" << *expected << "\nrelative_error=" << rel << '\n';
      if (rel > tol) return exit_verification;
    }
    return exit_ok;
  } catch (const InvalidArgument& e) {
    std::cerr << e.what() << '\n';
    return exit_invalid_config;
  }
}

struct Outcome {
  bool passed = true;
  double seconds = 0;
  std::vector<std::string> notes;
};

int accept_command(const std::string& dir, const std::string& out_root, const std::vector<int>& only) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".conf") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "no .conf files in " << dir << '\n';
    return exit_invalid_config;
  }
  std::map<int, Outcome> verdict;
  for (const auto& f : files) {
    ExperimentConfig cfg;
    try {
      cfg = load_config(f.string(), {{"output", (fs::path(out_root) / f.stem()).string()}});
    } catch (const ConfigError& e) {
      for (const auto& m : e.errors()) std::cerr << f.filename().string() << ": " << m << '\n';
      return exit_invalid_config;
    }
    if (cfg.criteria.empty()) {
      std::cerr << f.filename().string() << ": no criteria key\n";
      return exit_invalid_config;
    }
    if (!only.empty() && std::none_of(cfg.criteria.begin(), cfg.criteria.end(), [&](int c) {
          return std::find(only.begin(), only.end(), c) != only.end();
        }))
      continue;
    std::cerr << "== " << f.filename().string() << '\n';
    ExperimentResult res;
    std::ostringstream err;
    const auto start = std::chrono::steady_clock::now();
    const int code = run_experiment_status(cfg, err, &res);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (int c : cfg.criteria) {
      auto& o = verdict[c];
      o.seconds += secs;
      if (code == exit_numerical || code == exit_invalid_config) {
        o.passed = false;
        std::string m = err.str();
        if (!m.empty() && m.back() == '\n') m.pop_back();
        o.notes.push_back(m);
      }
      bool any = false;
      for (const auto& ch : res.checks)
        if (std::find(ch.criteria.begin(), ch.criteria.end(), c) != ch.criteria.end()) {
          any = true;
          o.passed = o.passed && ch.passed;
          o.notes.push_back(ch.name + ": " + ch.detail);
        }
      if (!any && code == exit_ok) {
        o.passed = false;
        o.notes.push_back("no check decides this criterion");
      }
      if (secs > cfg.runtime_budget) {
        o.passed = false;
        std::ostringstream m;
        m << "runtime " << std::fixed << std::setprecision(1) << secs << " s over budget " << cfg.runtime_budget << " s";
        o.notes.push_back(m.str());
      }
    }
  }
  bool all = true;
  for (const auto& [c, o] : verdict) {
    all = all && o.passed;
    std::cout << "AC" << std::setw(2) << std::left << c << ' ' << (o.passed ? "PASS" : "FAIL") << "  " << std::fixed
              << std::setprecision(1) << std::setw(6) << std::right << o.seconds << " s  ";
    for (std::size_t i = 0; i < o.notes.size(); ++i) std::cout << (i ? " | " : "") << o.notes[i];
    std::cout << '\n';
  }
  return all ? exit_ok : exit_verification;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-speed-of-propagation numerics for power-law flows"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");

  struct Sub {
    const char* name;
    const char* help;
    std::string fallback;
    std::set<std::string> allowed;
    ConfigFlags flags;
    CLI::App* cmd = nullptr;
  };
  std::vector<Sub> subs;
  subs.reserve(6);
  subs.push_back({"simulate", "run any experiment named by the config", "", {}, {}});
  subs.push_back({"barenblatt", "Barenblatt exponent fit or convergence study", "barenblatt-fit", {"barenblatt-fit"}, {}});
  subs.push_back({"fluid2d", "two-dimensional fluid runs", "fluid2d-taylor-green",
                  {"fluid2d-taylor-green", "fluid2d-halfplane"}, {}});
  subs.push_back({"track-support", "half-space front against the envelopes", "halfspace-fsp", {"halfspace-fsp"}, {}});
  subs.push_back({"energy", "energy ledger, local energy ratios and the J iteration", "energy-ledger", {"energy-ledger"}, {}});
  subs.push_back({"verify-lemmas", "exponent identities and the lemma suites", "exponent-identities",
                  {"exponent-identities", "lemma-a1-suite", "lemma-a2-suite"}, {}});
  for (auto& s : subs) {
    s.cmd = app.add_subcommand(s.name, s.help);
    s.flags.attach(s.cmd);
  }

  auto* fit = app.add_subcommand("fit-exponent", "fit log front against log t from a t,front CSV");
  std::string trace;
  FitWindow window;
  double t_min = 0, t_max = 0, expected = 0, tol = 0.05;
  fit->add_option("trace", trace, "trace CSV")->required()->check(CLI::ExistingFile);
  fit->add_option("--fit_drop", window.drop_fraction, "fraction dropped at each end")->check(CLI::Range(0.0, 0.49));
  auto* o_min = fit->add_option("--fit_t_min", t_min, "window start");
  auto* o_max = fit->add_option("--fit_t_max", t_max, "window end");
  auto* o_exp = fit->add_option("--expected_exponent", expected, "exit 3 unless the slope matches");
  fit->add_option("--exponent_tol", tol, "relative tolerance against --expected_exponent");

  auto* accept = app.add_subcommand("accept", "run the acceptance suite and print one line per criterion");
  std::string dir = "configs/acceptance", out_root = "out/acceptance";
  std::vector<int> only;
  accept->add_option("--dir", dir, "directory of acceptance configs")->check(CLI::ExistingDirectory);
  accept->add_option("--output", out_root, "root of the per-config output directories");
  accept->add_option("--only", only, "criteria to run");

  auto* keys = app.add_subcommand("config-reference", "print every config key with its default");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_invalid_config;
  }

  if (*keys) {
    std::cout << config_reference();
    return exit_ok;
  }
  if (*fit) {
    if (*o_min) window.t_min = t_min;
    if (*o_max) window.t_max = t_max;
    return fit_command(trace, window, *o_exp ? std::optional<double>(expected) : std::nullopt, tol);
  }
  if (*accept) return accept_command(dir, out_root, only);
  for (auto& s : subs)
    if (*s.cmd) return run_command(s.flags, s.fallback, s.allowed);
  return exit_invalid_config;
}
