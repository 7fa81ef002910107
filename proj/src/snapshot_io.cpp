#include "eulerlab/snapshot_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "eulerlab/errors.hpp"

namespace eulerlab {

namespace {

constexpr char kMagic[5] = {'E', 'U', 'L', 'B', '1'};

template <class T>
void put(std::ostream& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(T))) throw ConfigError("snapshot is truncated");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void write_snapshot(std::ostream& out, const SpectralField& field, double t) {
  SpectralField f = field;
  f.sync_physical();
  const Grid& g = f.grid();
  out.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.n()));
  put<double>(out, g.box_length());
  put<double>(out, t);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(f.components()));
  for (int c = 0; c < f.components(); ++c)
    for (double x : f.physical(c)) put<double>(out, x);
  if (!out) throw Error("failed to write snapshot");
}

void write_snapshot(const std::filesystem::path& path, const SpectralField& field, double t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_snapshot(out, field, t);
}

Snapshot read_snapshot(std::istream& in) {
  char magic[5];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw ConfigError("not an EULB1 snapshot");
  Snapshot s;
  s.n = static_cast<int>(get<std::uint32_t>(in));
  s.box_length = get<double>(in);
  s.t = get<double>(in);
  s.components = static_cast<int>(get<std::uint32_t>(in));
  if (s.n <= 0 || s.n > 4096 || s.components <= 0 || s.components > 64)
    throw ConfigError("snapshot header has implausible sizes");
  const std::size_t count = static_cast<std::size_t>(s.components) * s.n * s.n * s.n;
  s.data.resize(count);
  for (double& x : s.data) x = get<double>(in);
  return s;
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open snapshot " + path.string());
  return read_snapshot(in);
}

SpectralField snapshot_field(const Snapshot& snap, const GridPtr& grid) {
  if (snap.n != grid->n() || snap.box_length != grid->box_length())
    throw ContractViolation("snapshot grid does not match");
  SpectralField f(grid, snap.components);
  const std::size_t np = grid->point_count();
  for (int c = 0; c < snap.components; ++c) {
    auto d = f.edit_physical(c);
    std::copy_n(snap.data.begin() + static_cast<std::ptrdiff_t>(c * np), np, d.begin());
  }
  return f;
}

}  // namespace eulerlab
