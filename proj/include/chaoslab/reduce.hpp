#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace chaoslab {

/// Fixed block length for deterministic reductions. Partial sums are formed
/// per block in index order and then combined in block order, so the result
/// is bitwise identical for any thread count (and equals the serial path).
inline constexpr std::size_t kReduceBlock = 4096;

/// Deterministic blocked sum; `parallel = false` is the serial reference.
double blocked_sum(const double* x, std::size_t n, bool parallel = true);

/// Deterministic blocked dot product sum(x[i]*y[i]).
double blocked_dot(const double* x, const double* y, std::size_t n,
                   bool parallel = true);

} // namespace chaoslab
