#pragma once

#include "fsplab/error.hpp"
#include "fsplab/field.hpp"

#include <string>
#include <vector>

namespace fsp {

template <class Field>
struct Snapshot {
  double t = 0.0;
  Field field;
};

/// Time-ordered field snapshots; times strictly increasing.
template <class Field>
class Trajectory {
public:
  void push(double t, Field field) {
    if (!snaps_.empty() && !(t > snaps_.back().t))
      throw InvalidArgument("trajectory times must be strictly increasing");
    snaps_.push_back({t, std::move(field)});
  }

  bool empty() const { return snaps_.empty(); }
  std::size_t size() const { return snaps_.size(); }
  const Snapshot<Field>& operator[](std::size_t k) const { return snaps_[k]; }
  const Snapshot<Field>& front() const { return snaps_.front(); }
  const Snapshot<Field>& back() const { return snaps_.back(); }
  auto begin() const { return snaps_.begin(); }
  auto end() const { return snaps_.end(); }

private:
  std::vector<Snapshot<Field>> snaps_;
};

using ScalarTrajectory = Trajectory<ScalarField>;
using VectorTrajectory = Trajectory<VectorField>;

/// `count` times from t0 to t1 inclusive, uniform or geometric.
std::vector<double> uniform_schedule(double t0, double t1, int count);
std::vector<double> log_schedule(double t0, double t1, int count);

} // namespace fsp
