#include "fsplab/field_io.hpp"

#include "fsplab/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fsp {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_header(std::ostream& out, const GridSpec& grid) {
  out << "# grid: N=" << grid.dim() << " cells=";
  for (int a = 0; a < grid.dim(); ++a) out << (a ? "," : "") << grid.axis(a).cells;
  out << " bounds=";
  for (int a = 0; a < grid.dim(); ++a)
    out << (a ? "," : "") << format_double(grid.axis(a).lower) << ":" << format_double(grid.axis(a).upper);
  out << " bc=";
  for (int a = 0; a < grid.dim(); ++a) out << (a ? "," : "") << to_string(grid.axis(a).bc);
  out << "\n";
}

void write_rows(std::ostream& out, const GridSpec& grid, const std::vector<std::span<const double>>& cols) {
  std::string line;
  for (std::size_t n = 0; n < grid.node_count(); ++n) {
    const Point x = grid.point(n);
    line.clear();
    for (int a = 0; a < grid.dim(); ++a) {
      line += format_double(x[static_cast<std::size_t>(a)]);
      line += ',';
    }
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (c) line += ',';
      line += format_double(cols[c][n]);
    }
    line += '\n';
    out << line;
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(cur);
  return parts;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw InvalidArgument("cannot parse number '" + s + "'");
  return v;
}

GridSpec parse_header(const std::string& line) {
  const std::string tag = "# grid:";
  if (line.rfind(tag, 0) != 0) throw InvalidArgument("field CSV must start with '# grid:' header");
  std::istringstream is(line.substr(tag.size()));
  std::string tok;
  int dim = 0;
  std::vector<int> cells;
  std::vector<std::pair<double, double>> bounds;
  std::vector<Boundary> bcs;
  while (is >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw InvalidArgument("malformed header token '" + tok + "'");
    const std::string key = tok.substr(0, eq);
    const std::string val = tok.substr(eq + 1);
    if (key == "N") {
      dim = std::stoi(val);
    } else if (key == "cells") {
      for (const auto& c : split(val, ',')) cells.push_back(std::stoi(c));
    } else if (key == "bounds") {
      for (const auto& b : split(val, ',')) {
        const auto colon = b.find(':');
        if (colon == std::string::npos) throw InvalidArgument("bounds must be lo:hi");
        bounds.emplace_back(parse_double(b.substr(0, colon)), parse_double(b.substr(colon + 1)));
      }
    } else if (key == "bc") {
      for (const auto& b : split(val, ',')) bcs.push_back(boundary_from_string(b));
    } else {
      throw InvalidArgument("unknown header key '" + key + "'");
    }
  }
  if (dim < 1 || dim > 2 || cells.size() != static_cast<std::size_t>(dim) ||
      bounds.size() != static_cast<std::size_t>(dim))
    throw InvalidArgument("inconsistent grid header");
  if (bcs.empty()) bcs.assign(static_cast<std::size_t>(dim), Boundary::dirichlet_zero);
  std::vector<Axis> axes;
  for (std::size_t a = 0; a < static_cast<std::size_t>(dim); ++a)
    axes.push_back(Axis{bounds[a].first, bounds[a].second, cells[a], bcs.at(a)});
  return GridSpec(std::move(axes));
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
  return out;
}

} // namespace

void write_field_csv(std::ostream& out, const ScalarField& f) {
  write_header(out, f.grid());
  write_rows(out, f.grid(), {f.values()});
}

void write_field_csv(std::ostream& out, const VectorField& v) {
  write_header(out, v.grid());
  std::vector<std::span<const double>> cols;
  for (int k = 0; k < v.components(); ++k) cols.push_back(v.component(k));
  write_rows(out, v.grid(), cols);
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
  auto out = open_out(path);
  write_field_csv(out, f);
}

void write_field_csv(const std::filesystem::path& path, const VectorField& v) {
  auto out = open_out(path);
  write_field_csv(out, v);
}

FieldTable read_field_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("empty field CSV");
  FieldTable table{parse_header(line), {}};
  const int dim = table.grid.dim();
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto parts = split(line, ',');
    if (parts.size() <= static_cast<std::size_t>(dim)) throw InvalidArgument("field row has no value column");
    const std::size_t ncols = parts.size() - static_cast<std::size_t>(dim);
    if (table.columns.empty()) table.columns.assign(ncols, {});
    if (ncols != table.columns.size()) throw InvalidArgument("ragged field CSV");
    for (std::size_t c = 0; c < ncols; ++c) table.columns[c].push_back(parse_double(parts[static_cast<std::size_t>(dim) + c]));
    ++row;
  }
  if (row != table.grid.node_count()) throw InvalidArgument("field CSV row count does not match grid");
  return table;
}

ScalarField read_scalar_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  auto t = read_field_table(in);
  if (t.columns.size() != 1) throw InvalidArgument("expected one value column");
  return ScalarField(t.grid, std::move(t.columns[0]));
}

VectorField read_vector_field(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  auto t = read_field_table(in);
  return VectorField(t.grid, std::move(t.columns));
}

namespace {

template <class Traj>
void write_traj(const std::filesystem::path& dir, const Traj& traj) {
  std::filesystem::create_directories(dir);
  auto index = open_out(dir / "index.csv");
  index << "t,filename\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "snap_%05zu.csv", k);
    write_field_csv(dir / name, traj[k].field);
    index << format_double(traj[k].t) << "," << name << "\n";
  }
}

} // namespace

void write_trajectory(const std::filesystem::path& dir, const ScalarTrajectory& traj) { write_traj(dir, traj); }
void write_trajectory(const std::filesystem::path& dir, const VectorTrajectory& traj) { write_traj(dir, traj); }

ScalarTrajectory read_scalar_trajectory(const std::filesystem::path& index_csv) {
  std::ifstream in(index_csv);
  if (!in) throw InvalidArgument("cannot open '" + index_csv.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "t,filename") throw InvalidArgument("trajectory index must start with 't,filename'");
  ScalarTrajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument("malformed index row '" + line + "'");
    traj.push(parse_double(line.substr(0, comma)), read_scalar_field(index_csv.parent_path() / line.substr(comma + 1)));
  }
  return traj;
}

} // namespace fsp
