#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fsp {

/// Fixed block size for parallel reductions. Results depend only on the
/// input, never on the thread count.
inline constexpr std::size_t kReductionBlock = 4096;

/// Recursive pairwise summation in a fixed order.
double pairwise_sum(std::span<const double> values);

/// Sum of term(n) for n in [0, count): blocks of kReductionBlock are summed
/// pairwise (in parallel across blocks), then the block partials pairwise.
template <class Term>
double deterministic_sum(std::size_t count, Term&& term) {
  const std::size_t blocks = (count + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(blocks, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = lo + kReductionBlock < count ? lo + kReductionBlock : count;
    double buf[kReductionBlock];
    for (std::size_t n = lo; n < hi; ++n) buf[n - lo] = term(n);
    partial[static_cast<std::size_t>(b)] = pairwise_sum(std::span<const double>(buf, hi - lo));
  }
  return pairwise_sum(partial);
}

/// max of term(n); order-independent so any schedule is deterministic.
template <class Term>
double parallel_max(std::size_t count, Term&& term, double init = 0.0) {
  double best = init;
#pragma omp parallel for reduction(max : best) schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(count); ++n) {
    const double v = term(static_cast<std::size_t>(n));
    if (v > best) best = v;
  }
  return best;
}

} // namespace fsp
