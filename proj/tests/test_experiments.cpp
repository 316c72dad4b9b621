#include "fsplab/config.hpp"
#include "fsplab/experiments.hpp"
#include "fsplab/plot.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace fsp;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> config_errors(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.errors();
  }
  return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fsplab_test_" + name);
  fs::remove_all(p);
  return p;
}

} // namespace

TEST_CASE("config: minimal file takes documented defaults") {
  const auto cfg = parse_config("# smoke\nexperiment = barenblatt-fit\n");
  CHECK(cfg.kind == ExperimentKind::barenblatt_fit);
  CHECK(cfg.p == 3.0);
  CHECK(cfg.cells == 1024);
  CHECK(cfg.tau == 1e-6);
  CHECK(!cfg.j_constant);
  CHECK(cfg.echo.at("p") == "3");
  CHECK(cfg.echo.size() == config_keys().size());
  // the reference text parses back to the defaults
  CHECK_NOTHROW(parse_config(config_reference(), {{"experiment", "barenblatt-fit"}}));
}

TEST_CASE("config: errors") {
  auto e = config_errors("experiment = halfspace-fsp\np = 1.5\n");
  REQUIRE(e.size() == 1);
  CHECK(any_contains(e, "line 2"));
  CHECK(any_contains(e, "p must be > 2"));

  e = config_errors("experiment = barenblatt-fit\ncells = 64\n\ncells = 128\n");
  REQUIRE(e.size() == 1);
  CHECK(any_contains(e, "line 4"));
  CHECK(any_contains(e, "line 2"));

  // every problem is reported, not only the first
  e = config_errors("experiment = barenblatt-fit\nbogus = 1\ncells = many\ntau = -1\nthis line\n");
  CHECK(e.size() == 4);
  CHECK(any_contains(e, "unknown key 'bogus'"));
  CHECK(any_contains(e, "line 3"));
  CHECK(any_contains(e, "line 5"));

  CHECK(!config_errors("p = 3\n").empty());
  CHECK(any_contains(config_errors("experiment = nothing\n"), "line 1"));
}

TEST_CASE("config: overrides win") {
  const auto cfg = parse_config("experiment = barenblatt-fit\ncells = 64\n", {{"cells", "128"}, {"tau", "1e-3"}});
  CHECK(cfg.cells == 128);
  CHECK(cfg.tau == 1e-3);
  try {
    parse_config("experiment = barenblatt-fit\n", {{"cells", "-4"}});
    FAIL("expected a range error");
  } catch (const ConfigError& err) {
    CHECK(any_contains(err.errors(), "--cells"));
  }
}

TEST_CASE("plot: structure and errors") {
  PlotSpec one{"one", "x", "y", false, false, {{"a", {1.0}, {2.0}}}, {}, {}};
  const std::string svg = render_svg(one);
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(count(svg, "<svg") == 1);
  CHECK(count(svg, "class=\"marker\"") == 1);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);

  PlotSpec empty = one;
  empty.series = {{"a", {}, {}}};
  CHECK_THROWS_AS(render_svg(empty), InvalidArgument);

  PlotSpec bad{"bad", "t", "f", true, true, {{"front", {1.0, 2.0, 3.0}, {1.0, 0.0, 2.0}}}, {}, {}};
  try {
    render_svg(bad);
    FAIL("expected an error");
  } catch (const InvalidArgument& e) {
    CHECK(std::string(e.what()).find("sample 1") != std::string::npos);
  }
}

TEST_CASE("experiments: smoke run, plot and determinism") {
  const fs::path a = scratch("a"), b = scratch("b");
  auto cfg = parse_config("experiment = barenblatt-fit\ncells = 256\nt_end = 4\nsnapshots = 30\n", {{"output", a.string()}});
  const auto res = run_experiment(cfg);
  CHECK(res.passed());
  for (const char* f : {"manifest.txt", "trace.csv", "fit.txt", "front.svg"}) CHECK(fs::exists(a / f));
  CHECK(slurp(a / "trace.csv").rfind("t,front\n", 0) == 0);

  const std::string svg = slurp(a / "front.svg");
  CHECK(count(svg, "class=\"fit\"") == 1);
  CHECK(count(svg, "class=\"envelope\"") == 1);

  cfg.output = b.string();
  run_experiment(cfg);
  for (const char* f : {"trace.csv", "fit.txt", "mass.txt", "front.svg"}) CHECK(slurp(a / f) == slurp(b / f));
  // manifests differ only on the timing line
  std::istringstream ma(slurp(a / "manifest.txt")), mb(slurp(b / "manifest.txt"));
  int differing = 0;
  for (std::string la, lb; std::getline(ma, la) && std::getline(mb, lb);)
    if (la != lb) {
      ++differing;
      CHECK(la.rfind("timing=", 0) == 0);
      CHECK(la.rfind("config.output=", 0) != 0);
    }
  CHECK(differing <= 2);
}

TEST_CASE("experiments: exit codes") {
  std::ostringstream err;
  const fs::path out = scratch("box");
  auto cfg = parse_config("experiment = halfspace-fsp\nbox = 1\ncells = 128\nt_end = 10\nsnapshots = 20\n", {{"output", out.string()}});
  CHECK(run_experiment_status(cfg, err) == exit_numerical);
  CHECK(err.str().find("boundary sentinel") != std::string::npos);

  cfg = parse_config("experiment = exponent-identities\n", {{"output", scratch("id").string()}});
  CHECK(run_experiment_status(cfg, err) == exit_ok);

  cfg.identity_tol = 0.0;
  cfg.kind = ExperimentKind::lemma_a1_suite;
  cfg.cases = 0;
  CHECK(run_experiment_status(cfg, err) == exit_invalid_config);

  // a tolerance nothing can meet is a verification failure
  cfg = parse_config("experiment = barenblatt-fit\ncells = 128\nt_end = 3\nsnapshots = 20\nexponent_tol = 1e-9\n",
                     {{"output", scratch("tight").string()}});
  CHECK(run_experiment_status(cfg, err) == exit_verification);
}

TEST_CASE("experiments: half-space bump") {
  const GridSpec g = GridSpec::line(-1.0, 1.0, 200, Boundary::dirichlet_zero);
  const ScalarField u = halfspace_bump(g, 0.2, 3.0);
  for (std::size_t n = 0; n < u.size(); ++n) {
    const double x = g.point(n)[0];
    if (x >= 0.0 || x <= -0.2) CHECK(u[n] == 0.0);
  }
  CHECK(u[g.index(90)] == doctest::Approx(3.0));
  CHECK_THROWS_AS(halfspace_bump(g, 0.0, 1.0), InvalidArgument);
}
