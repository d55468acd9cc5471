#include "robodata/bundle.hpp"

#include <cstring>
#include <fstream>

namespace robodata {

namespace {

constexpr char kMagic[4] = {'R', 'D', 'L', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& os, std::uint32_t v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint32_t get_u32(std::istream& is) {
  std::uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), sizeof(v));
  return v;
}

void put_doubles(std::ostream& os, const double* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_doubles(std::istream& is, double* data, std::size_t n) {
  is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

// Row-major on disk; Eigen is column-major by default.
void put_matrix(std::ostream& os, const Eigen::MatrixXd& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  put_doubles(os, rm.data(), static_cast<std::size_t>(rm.size()));
}

Eigen::MatrixXd get_matrix(std::istream& is, Eigen::Index rows, Eigen::Index cols) {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
  get_doubles(is, rm.data(), static_cast<std::size_t>(rm.size()));
  return rm;
}

void put_frames(std::ostream& os, const std::vector<Eigen::ArrayXXd>& frames) {
  put_u32(os, static_cast<std::uint32_t>(frames.front().rows()));
  put_u32(os, static_cast<std::uint32_t>(frames.front().cols()));
  for (const auto& f : frames) put_matrix(os, f.matrix());
}

std::vector<Eigen::ArrayXXd> get_frames(std::istream& is, std::size_t h) {
  const Eigen::Index rows = static_cast<Eigen::Index>(get_u32(is));
  const Eigen::Index cols = static_cast<Eigen::Index>(get_u32(is));
  std::vector<Eigen::ArrayXXd> out;
  out.reserve(h);
  for (std::size_t t = 0; t < h; ++t) out.push_back(get_matrix(is, rows, cols).array());
  return out;
}

}  // namespace

void write_bundle(const std::filesystem::path& path, const PredictionBundle& bundle) {
  const Eigen::Index h = bundle.pred_pose.rows();
  if (bundle.pred_pose.cols() != 6 || bundle.target_pose.rows() != h ||
      bundle.pred_gripper.size() != h || bundle.target_gripper.size() != h) {
    throw ShapeMismatchError("write_bundle: inconsistent action shapes");
  }
  if (bundle.pred_simg.has_value() != bundle.target_simg.has_value() ||
      bundle.pred_gimg.has_value() != bundle.target_gimg.has_value()) {
    throw ShapeMismatchError("write_bundle: predictions and targets must pair up");
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open for writing: " + path.string());
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<std::uint32_t>(h));
  std::uint32_t flags = 0;
  if (bundle.pred_simg) flags |= 1;
  if (bundle.pred_gimg) flags |= 2;
  if (bundle.occ) flags |= 4;
  put_u32(os, flags);

  put_matrix(os, bundle.pred_pose);
  put_doubles(os, bundle.pred_gripper.data(), static_cast<std::size_t>(h));
  put_matrix(os, bundle.target_pose);
  put_doubles(os, bundle.target_gripper.data(), static_cast<std::size_t>(h));

  if (bundle.pred_simg) {
    put_frames(os, *bundle.pred_simg);
    for (const auto& f : *bundle.target_simg) put_matrix(os, f.matrix());
  }
  if (bundle.pred_gimg) {
    put_frames(os, *bundle.pred_gimg);
    for (const auto& f : *bundle.target_gimg) put_matrix(os, f.matrix());
  }
  if (bundle.occ) {
    const Eigen::Index n = bundle.occ->pred_pos.empty() ? 0 : bundle.occ->pred_pos.front().rows();
    put_u32(os, static_cast<std::uint32_t>(n));
    for (Eigen::Index t = 0; t < h; ++t) {
      const auto ti = static_cast<std::size_t>(t);
      put_matrix(os, bundle.occ->pred_pos.at(ti));
      put_matrix(os, bundle.occ->pred_rgb.at(ti));
      put_matrix(os, bundle.occ->target_pos.at(ti));
      put_matrix(os, bundle.occ->target_rgb.at(ti));
    }
  }
  if (!os) throw IoError("failed writing " + path.string());
}

PredictionBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open bundle: " + path.string());
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not a prediction bundle: " + path.string());
  }
  if (get_u32(is) != kVersion) {
    throw SchemaVersionError("unsupported bundle version in " + path.string());
  }
  const std::size_t h = get_u32(is);
  const std::uint32_t flags = get_u32(is);

  PredictionBundle bundle;
  const Eigen::Index hi = static_cast<Eigen::Index>(h);
  bundle.pred_pose = get_matrix(is, hi, 6);
  bundle.pred_gripper.resize(hi);
  get_doubles(is, bundle.pred_gripper.data(), h);
  bundle.target_pose = get_matrix(is, hi, 6);
  bundle.target_gripper.resize(hi);
  get_doubles(is, bundle.target_gripper.data(), h);

  if (flags & 1) {
    bundle.pred_simg = get_frames(is, h);
    std::vector<Eigen::ArrayXXd> targets;
    for (std::size_t t = 0; t < h; ++t) {
      targets.push_back(
          get_matrix(is, bundle.pred_simg->front().rows(), bundle.pred_simg->front().cols())
              .array());
    }
    bundle.target_simg = std::move(targets);
  }
  if (flags & 2) {
    bundle.pred_gimg = get_frames(is, h);
    std::vector<Eigen::ArrayXXd> targets;
    for (std::size_t t = 0; t < h; ++t) {
      targets.push_back(
          get_matrix(is, bundle.pred_gimg->front().rows(), bundle.pred_gimg->front().cols())
              .array());
    }
    bundle.target_gimg = std::move(targets);
  }
  if (flags & 4) {
    const Eigen::Index n = static_cast<Eigen::Index>(get_u32(is));
    OccPointSets occ;
    for (std::size_t t = 0; t < h; ++t) {
      occ.pred_pos.push_back(get_matrix(is, n, 3));
      occ.pred_rgb.push_back(get_matrix(is, n, 3));
      occ.target_pos.push_back(get_matrix(is, n, 3));
      occ.target_rgb.push_back(get_matrix(is, n, 3));
    }
    bundle.occ = std::move(occ);
  }
  if (!is) throw IoError("truncated bundle: " + path.string());
  return bundle;
}

}  // namespace robodata
