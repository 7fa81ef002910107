#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "eulerlab/spectral_grid.hpp"

namespace eulerlab {

/**
 * Flat binary field snapshot.
 *
 * Layout (all little-endian):
 *   5 bytes  magic "EULB1"
 *   uint32   n
 *   float64  box_length
 *   float64  t
 *   uint32   component count
 *   float64  data[components][n][n][n]   (row-major, x1 slowest)
 */
struct Snapshot {
  int n = 0;
  double box_length = 0.0;
  double t = 0.0;
  int components = 0;
  std::vector<double> data;
};

void write_snapshot(std::ostream& out, const SpectralField& field, double t);
void write_snapshot(const std::filesystem::path& path, const SpectralField& field, double t);

/// Throws ConfigError on a bad magic, a truncated stream or inconsistent sizes.
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::filesystem::path& path);

/// Field on `grid` holding the snapshot data; the grid size must match.
SpectralField snapshot_field(const Snapshot& snap, const GridPtr& grid);

}  // namespace eulerlab
