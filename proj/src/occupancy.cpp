#include "robodata/occupancy.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace robodata {

Eigen::Matrix<double, Eigen::Dynamic, 3> GridQuery::positions() const {
  Eigen::Matrix<double, Eigen::Dynamic, 3> out(cell_count(), 3);
  Eigen::Index row = 0;
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < b; ++j) {
      for (int k = 0; k < p; ++k) {
        out.row(row++) = center(i, j, k).transpose();
      }
    }
  }
  return out;
}

Eigen::MatrixXd GridQuery::pillar_positions() const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(l) * b, 3 * p);
  for (int i = 0; i < l; ++i) {
    for (int j = 0; j < b; ++j) {
      for (int k = 0; k < p; ++k) {
        out.block<1, 3>(static_cast<Eigen::Index>(i) * b + j, 3 * k) =
            center(i, j, k).transpose();
      }
    }
  }
  return out;
}

GridQuery make_grid(int l, int b, int p) {
  if (l < 1 || b < 1 || p < 1) {
    throw InvalidDimsError("make_grid: all grid dims must be >= 1");
  }
  GridQuery g;
  g.l = l;
  g.b = b;
  g.p = p;
  g.min = Eigen::Vector3d(-0.5, -0.5, 0.0);
  g.max = Eigen::Vector3d(0.5, 0.5, 1.0);
  return g;
}

namespace {

// Cell index along one axis; -1 when outside. Points exactly on the max
// bound belong to the last cell.
int bin_axis(double x, double lo, double hi, int n, double step) {
  if (x < lo || x > hi) return -1;
  const int i = static_cast<int>(std::floor((x - lo) / step));
  return std::min(i, n - 1);
}

}  // namespace

OccupancyGrid voxelize(const ColoredCloud& cloud, const GridQuery& grid) {
  OccupancyGrid out;
  out.l = grid.l;
  out.b = grid.b;
  out.p = grid.p;
  out.occupied.assign(grid.cell_count(), 0);
  out.rgb.assign(grid.cell_count(), Eigen::Vector3d::Zero());
  out.counts.assign(grid.cell_count(), 0);
  const Eigen::Vector3d step = grid.voxel_size();
  for (std::size_t n = 0; n < cloud.points.size(); ++n) {
    const Eigen::Vector3d& q = cloud.points[n];
    const int i = bin_axis(q.x(), grid.min.x(), grid.max.x(), grid.l, step.x());
    const int j = bin_axis(q.y(), grid.min.y(), grid.max.y(), grid.b, step.y());
    const int k = bin_axis(q.z(), grid.min.z(), grid.max.z(), grid.p, step.z());
    if (i < 0 || j < 0 || k < 0) {
      ++out.dropped;
      continue;
    }
    const std::size_t idx = grid.index(i, j, k);
    out.counts[idx] += 1;
    out.rgb[idx] += cloud.colors[n];
  }
  for (std::size_t idx = 0; idx < out.counts.size(); ++idx) {
    if (out.counts[idx] > 0) {
      out.occupied[idx] = 1;
      out.rgb[idx] /= out.counts[idx];
    }
  }
  return out;
}

namespace {
constexpr char kMagic[4] = {'O', 'C', 'C', 'G'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}
}  // namespace

void write_occupancy(const std::filesystem::path& path, const OccupancyGrid& grid) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, static_cast<std::uint32_t>(grid.l));
  put(os, static_cast<std::uint32_t>(grid.b));
  put(os, static_cast<std::uint32_t>(grid.p));
  const std::size_t cells = grid.occupied.size();
  std::vector<std::uint8_t> bits((cells + 7) / 8, 0);
  for (std::size_t i = 0; i < cells; ++i) {
    if (grid.occupied[i]) bits[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  }
  os.write(reinterpret_cast<const char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  for (std::size_t i = 0; i < cells; ++i) {
    if (!grid.occupied[i]) continue;
    for (int c = 0; c < 3; ++c) put(os, static_cast<float>(grid.rgb[i][c]));
  }
  if (!os) throw IoError("failed writing occupancy grid: " + path.string());
}

OccupancyGrid read_occupancy(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open occupancy grid: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not an occupancy grid file: " + path.string());
  }
  if (get<std::uint32_t>(is) != kVersion) {
    throw SchemaVersionError("unsupported occupancy grid version in " + path.string());
  }
  OccupancyGrid grid;
  grid.l = static_cast<int>(get<std::uint32_t>(is));
  grid.b = static_cast<int>(get<std::uint32_t>(is));
  grid.p = static_cast<int>(get<std::uint32_t>(is));
  const std::size_t cells =
      static_cast<std::size_t>(grid.l) * static_cast<std::size_t>(grid.b) * grid.p;
  std::vector<std::uint8_t> bits((cells + 7) / 8);
  is.read(reinterpret_cast<char*>(bits.data()), static_cast<std::streamsize>(bits.size()));
  grid.occupied.assign(cells, 0);
  grid.rgb.assign(cells, Eigen::Vector3d::Zero());
  grid.counts.assign(cells, 0);
  for (std::size_t i = 0; i < cells; ++i) {
    if (bits[i / 8] & (1u << (i % 8))) {
      grid.occupied[i] = 1;
      grid.counts[i] = 1;
    }
  }
  for (std::size_t i = 0; i < cells; ++i) {
    if (!grid.occupied[i]) continue;
    for (int c = 0; c < 3; ++c) grid.rgb[i][c] = get<float>(is);
  }
  if (!is) throw IoError("truncated occupancy grid: " + path.string());
  return grid;
}

}  // namespace robodata
