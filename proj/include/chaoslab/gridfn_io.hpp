#pragma once

#include <string>

#include "chaoslab/grid.hpp"

namespace chaoslab {

/// Format a double as %.17g (round-trip exact, byte-stable).
std::string fmt_g17(double v);

/// CSV form: first line "# dim,L,n" (L as %.17g), then one value per line
/// in row-major order.
void save_csv(const GridFunction& f, const std::string& path);
GridFunction load_csv(const std::string& path);

/// Binary form: 32-byte header (magic "CHGF", u32 version, u32 dim,
/// u32 flags bit0 = is_density, u64 n, f64 L, little-endian) followed by the
/// raw row-major doubles. Round-trips bit-exactly.
void save_binary(const GridFunction& f, const std::string& path);
GridFunction load_binary(const std::string& path);

} // namespace chaoslab
