#include "fsplab/trajectory.hpp"

#include <cmath>

namespace fsp {

std::vector<double> uniform_schedule(double t0, double t1, int count) {
  if (count < 2 || !(t1 > t0)) throw InvalidArgument("schedule needs count >= 2 and t1 > t0");
  std::vector<double> ts(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) ts[static_cast<std::size_t>(k)] = t0 + (t1 - t0) * k / (count - 1);
  ts.back() = t1;
  return ts;
}

std::vector<double> log_schedule(double t0, double t1, int count) {
  if (count < 2 || !(t1 > t0) || !(t0 > 0)) throw InvalidArgument("log schedule needs 0 < t0 < t1, count >= 2");
  std::vector<double> ts(static_cast<std::size_t>(count));
  const double r = std::log(t1 / t0);
  for (int k = 0; k < count; ++k) ts[static_cast<std::size_t>(k)] = t0 * std::exp(r * k / (count - 1));
  ts.front() = t0;
  ts.back() = t1;
  return ts;
}

} // namespace fsp
