#include "chaoslab/fft.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chaoslab::fft {

bool is_pow2(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Twiddle table w[k] = exp(sign * 2*pi*i * k / n), k = 0..n/2-1.
std::vector<cplx> twiddles(std::size_t n, int sign) {
  std::vector<cplx> w(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    double ang = sign * kTwoPi * static_cast<double>(k) / static_cast<double>(n);
    w[k] = cplx(std::cos(ang), std::sin(ang));
  }
  return w;
}

void transform_with_table(cplx* a, std::size_t n, const cplx* w) {
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    std::size_t step = n / len;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        cplx t = a[i + k + len / 2] * w[k * step];
        a[i + k + len / 2] = a[i + k] - t;
        a[i + k] += t;
      }
    }
  }
}

} // namespace

void transform_line(cplx* a, std::size_t n, int sign) {
  if (!is_pow2(n)) throw std::invalid_argument("fft: length must be a power of two");
  if (n == 1) return;
  auto w = twiddles(n, sign);
  transform_with_table(a, n, w.data());
}

namespace {

// Transform along one axis of a row-major array. Lines along `axis` are
// gathered into per-thread scratch, transformed, and scattered back; each
// line is an independent serial computation, so results do not depend on the
// thread count.
void transform_axis(std::vector<cplx>& a, const std::array<std::size_t, 3>& dims,
                    int ndim, int axis, int sign, bool parallel) {
  const std::size_t n = dims[static_cast<std::size_t>(axis)];
  if (n == 1) return;
  auto w = twiddles(n, sign);

  std::size_t stride = 1;
  for (int d = axis + 1; d < ndim; ++d) stride *= dims[static_cast<std::size_t>(d)];
  std::size_t outer = 1;
  for (int d = 0; d < axis; ++d) outer *= dims[static_cast<std::size_t>(d)];
  const std::int64_t nlines = static_cast<std::int64_t>(outer * stride);

  if (stride == 1) {
    // contiguous lines: transform in place
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t line = 0; line < nlines; ++line) {
      transform_with_table(a.data() + static_cast<std::size_t>(line) * n, n, w.data());
    }
    return;
  }

  int nthreads = 1;
#ifdef _OPENMP
  nthreads = omp_get_max_threads();
#endif
  std::vector<std::vector<cplx>> scratch(static_cast<std::size_t>(nthreads),
                                         std::vector<cplx>(n));
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t line = 0; line < nlines; ++line) {
    int tid = 0;
#ifdef _OPENMP
    tid = omp_get_thread_num();
#endif
    auto& buf = scratch[static_cast<std::size_t>(tid)];
    const std::size_t o = static_cast<std::size_t>(line) / stride;
    const std::size_t s = static_cast<std::size_t>(line) % stride;
    cplx* base = a.data() + o * n * stride + s;
    for (std::size_t k = 0; k < n; ++k) buf[k] = base[k * stride];
    transform_with_table(buf.data(), n, w.data());
    for (std::size_t k = 0; k < n; ++k) base[k * stride] = buf[k];
  }
}

} // namespace

void forward_nd(std::vector<cplx>& a, const std::array<std::size_t, 3>& dims,
                int ndim, bool parallel) {
  for (int axis = 0; axis < ndim; ++axis) transform_axis(a, dims, ndim, axis, -1, parallel);
}

void inverse_nd(std::vector<cplx>& a, const std::array<std::size_t, 3>& dims,
                int ndim, bool parallel) {
  for (int axis = 0; axis < ndim; ++axis) transform_axis(a, dims, ndim, axis, +1, parallel);
  std::size_t total = 1;
  for (int d = 0; d < ndim; ++d) total *= dims[static_cast<std::size_t>(d)];
  const double scale = 1.0 / static_cast<double>(total);
  const std::int64_t m = static_cast<std::int64_t>(a.size());
#pragma omp parallel for schedule(static) if (parallel)
  for (std::int64_t i = 0; i < m; ++i) a[static_cast<std::size_t>(i)] *= scale;
}

} // namespace chaoslab::fft
