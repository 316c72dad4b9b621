#pragma once

#include "fsplab/field.hpp"
#include "fsplab/trajectory.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace fsp {

/// Field CSV: a `# grid: N=<n> cells=<c1[,c2]> bounds=<lo:hi[,lo:hi]> bc=<...>`
/// header, then one row `x1[,x2],value[,value2]` per node in storage order.
/// Numbers use 17 significant digits so a read-back is bit-exact.
void write_field_csv(std::ostream& out, const ScalarField& f);
void write_field_csv(std::ostream& out, const VectorField& v);
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);
void write_field_csv(const std::filesystem::path& path, const VectorField& v);

struct FieldTable {
  GridSpec grid;
  std::vector<std::vector<double>> columns; // value columns, storage order
};

FieldTable read_field_table(std::istream& in);
ScalarField read_scalar_field(const std::filesystem::path& path);
VectorField read_vector_field(const std::filesystem::path& path);

/// One CSV per snapshot plus `index.csv` with rows `t,filename`.
void write_trajectory(const std::filesystem::path& dir, const ScalarTrajectory& traj);
void write_trajectory(const std::filesystem::path& dir, const VectorTrajectory& traj);
ScalarTrajectory read_scalar_trajectory(const std::filesystem::path& index_csv);

std::string format_double(double v);

} // namespace fsp
