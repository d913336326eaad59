#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <vector>

namespace chaoslab::fft {

using cplx = std::complex<double>;

/// True if n is a power of two (and n >= 1).
bool is_pow2(std::size_t n);

/// In-place radix-2 transform of a contiguous length-n buffer (n a power of
/// two). sign = -1 forward, +1 inverse. No normalization on either direction.
void transform_line(cplx* a, std::size_t n, int sign);

/// Unnormalized forward DFT of a row-major ndim-dimensional array with
/// per-axis extents dims[0..ndim-1] (each a power of two).
/// Line transforms are independent, so the result is bitwise identical for
/// any thread count; `parallel = false` runs the serial reference path.
void forward_nd(std::vector<cplx>& a, const std::array<std::size_t, 3>& dims,
                int ndim, bool parallel = true);

/// Inverse DFT with 1/(total size) normalization.
void inverse_nd(std::vector<cplx>& a, const std::array<std::size_t, 3>& dims,
                int ndim, bool parallel = true);

} // namespace chaoslab::fft
