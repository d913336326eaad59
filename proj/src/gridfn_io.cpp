#include "chaoslab/gridfn_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "chaoslab/errors.hpp"

namespace chaoslab {

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

void save_csv(const GridFunction& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("save_csv", "cannot open " + path + " for writing");
  os << "# " << f.grid.dim << "," << fmt_g17(f.grid.L) << "," << f.grid.n << "\n";
  for (double v : f.values) os << fmt_g17(v) << "\n";
  if (!os) throw IoError("save_csv", "write failure on " + path);
}

GridFunction load_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_csv", "cannot open " + path);
  std::string header;
  if (!std::getline(is, header) || header.size() < 2 || header[0] != '#')
    throw IoError("load_csv", path + ": missing '# dim,L,n' header");
  std::istringstream hs(header.substr(1));
  int dim = 0;
  double L = 0.0;
  std::int64_t n = 0;
  char c1 = 0, c2 = 0;
  if (!(hs >> dim >> c1 >> L >> c2 >> n) || c1 != ',' || c2 != ',')
    throw IoError("load_csv", path + ": malformed '# dim,L,n' header");
  GridFunction f{Grid(dim, L, n)};
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    std::string line;
    if (!std::getline(is, line))
      throw IoError("load_csv", path + ": fewer values than grid size");
    f.values[i] = std::strtod(line.c_str(), nullptr);
  }
  return f;
}

namespace {
#pragma pack(push, 1)
struct BinHeader {
  char magic[4];
  std::uint32_t version;
  std::uint32_t dim;
  std::uint32_t flags;
  std::uint64_t n;
  double L;
};
#pragma pack(pop)
static_assert(sizeof(BinHeader) == 32, "binary header must be 32 bytes");
} // namespace

void save_binary(const GridFunction& f, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("save_binary", "cannot open " + path + " for writing");
  BinHeader h{};
  std::memcpy(h.magic, "CHGF", 4);
  h.version = 1;
  h.dim = static_cast<std::uint32_t>(f.grid.dim);
  h.flags = f.is_density ? 1u : 0u;
  h.n = static_cast<std::uint64_t>(f.grid.n);
  h.L = f.grid.L;
  os.write(reinterpret_cast<const char*>(&h), sizeof h);
  os.write(reinterpret_cast<const char*>(f.values.data()),
           static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!os) throw IoError("save_binary", "write failure on " + path);
}

GridFunction load_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("load_binary", "cannot open " + path);
  BinHeader h{};
  is.read(reinterpret_cast<char*>(&h), sizeof h);
  if (!is || std::memcmp(h.magic, "CHGF", 4) != 0)
    throw IoError("load_binary", path + ": bad magic (expected CHGF)");
  if (h.version != 1)
    throw IoError("load_binary", path + ": unsupported version");
  GridFunction f{Grid(static_cast<int>(h.dim), h.L, static_cast<std::int64_t>(h.n))};
  f.is_density = (h.flags & 1u) != 0;
  is.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!is) throw IoError("load_binary", path + ": truncated value payload");
  return f;
}

} // namespace chaoslab
