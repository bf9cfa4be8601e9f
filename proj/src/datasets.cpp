#include "ddib/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>
#include <unordered_set>

#include "ddib/error.hpp"

namespace ddib {

PointCloud::PointCloud(Eigen::MatrixXd pts, std::vector<std::int64_t> t)
    : points(std::move(pts)), tags(std::move(t)) {
  if (tags.size() != static_cast<std::size_t>(points.cols())) {
    throw ShapeError("point cloud has " + std::to_string(points.cols()) +
                     " points but " + std::to_string(tags.size()) + " tags");
  }
}

PointCloud::PointCloud(Eigen::MatrixXd pts) : points(std::move(pts)) {
  tags.resize(static_cast<std::size_t>(points.cols()));
  for (std::size_t i = 0; i < tags.size(); ++i) tags[i] = static_cast<std::int64_t>(i);
}

void PointCloud::validate() const {
  if (tags.size() != size()) {
    throw ShapeError("point cloud tag count does not match point count");
  }
  std::unordered_set<std::int64_t> seen;
  seen.reserve(tags.size());
  for (auto t : tags) {
    if (!seen.insert(t).second) {
      throw ShapeError("duplicate tag " + std::to_string(t) + " in point cloud");
    }
  }
  if (!points.allFinite()) {
    throw ShapeError("point cloud contains non-finite coordinates");
  }
}

namespace {

struct KindName {
  DatasetKind kind;
  const char* name;
  const char* code;
};

constexpr KindName kKindNames[] = {
    {DatasetKind::kMoons, "moons", "M"},
    {DatasetKind::kCheckerboards, "checkerboards", "CB"},
    {DatasetKind::kConcentricRings, "concentric-rings", "CR"},
    {DatasetKind::kConcentricSquares, "concentric-squares", "CS"},
    {DatasetKind::kParallelRings, "parallel-rings", "PR"},
    {DatasetKind::kParallelSquares, "parallel-squares", "PS"},
    {DatasetKind::kGaussian, "gaussian", "G"},
};

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Point on the boundary of an axis-aligned square of half-width h, with
// u uniform in [0, 1) parameterizing arc length.
Eigen::Vector2d square_perimeter(double h, double u) {
  const double along = u * 8.0 * h;
  const int side = std::min(3, static_cast<int>(along / (2.0 * h)));
  const double s = along - side * 2.0 * h - h;
  switch (side) {
    case 0: return {s, -h};
    case 1: return {h, s};
    case 2: return {-s, h};
    default: return {-h, -s};
  }
}

}  // namespace

DatasetKind parse_dataset_kind(std::string_view name) {
  const std::string key = lower(name);
  for (const auto& k : kKindNames) {
    if (key == k.name || key == lower(k.code)) return k.kind;
  }
  // Underscore spellings.
  std::string dashed = key;
  std::replace(dashed.begin(), dashed.end(), '_', '-');
  for (const auto& k : kKindNames) {
    if (dashed == k.name) return k.kind;
  }
  throw ParameterError("unknown dataset kind '" + std::string(name) +
                       "' (expected one of moons, checkerboards, "
                       "concentric-rings, concentric-squares, parallel-rings, "
                       "parallel-squares, gaussian)");
}

std::string dataset_name(DatasetKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

std::string dataset_code(DatasetKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.code;
  }
  return "?";
}

PointCloud generate(DatasetKind kind, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ParameterError("generate: n must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double pi = std::numbers::pi;

  Eigen::MatrixXd pts(2, static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const bool second = (i % 2) == 1;
    Eigen::Vector2d p;
    switch (kind) {
      case DatasetKind::kMoons: {
        const double theta = pi * unit(rng);
        p = second ? Eigen::Vector2d(1.0 - std::cos(theta), 0.5 - std::sin(theta))
                   : Eigen::Vector2d(std::cos(theta), std::sin(theta));
        break;
      }
      case DatasetKind::kCheckerboards: {
        // Dark cells (row + col even) of a 4x4 board with unit cells.
        const int cell = std::min(7, static_cast<int>(unit(rng) * 8.0));
        const int row = cell / 2;
        const int col = 2 * (cell % 2) + (row % 2);
        p = Eigen::Vector2d(-2.0 + col + unit(rng), -2.0 + row + unit(rng));
        break;
      }
      case DatasetKind::kConcentricRings: {
        const double r = second ? 2.0 : 1.0;
        const double theta = 2.0 * pi * unit(rng);
        p = Eigen::Vector2d(r * std::cos(theta), r * std::sin(theta));
        break;
      }
      case DatasetKind::kConcentricSquares:
        p = square_perimeter(second ? 2.0 : 1.0, unit(rng));
        break;
      case DatasetKind::kParallelRings: {
        const double theta = 2.0 * pi * unit(rng);
        p = Eigen::Vector2d((second ? 1.2 : -1.2) + 0.8 * std::cos(theta),
                            0.8 * std::sin(theta));
        break;
      }
      case DatasetKind::kParallelSquares:
        p = square_perimeter(0.8, unit(rng)) +
            Eigen::Vector2d(second ? 1.2 : -1.2, 0.0);
        break;
      case DatasetKind::kGaussian:
        p = Eigen::Vector2d(normal(rng), normal(rng));
        pts.col(static_cast<Eigen::Index>(i)) = p;
        continue;
    }
    const double jx = normal(rng);
    const double jy = normal(rng);
    p += kDatasetJitter * Eigen::Vector2d(jx, jy);
    pts.col(static_cast<Eigen::Index>(i)) = p;
  }
  return PointCloud(std::move(pts));
}

Standardizer Standardizer::identity(int dim) {
  return {Eigen::VectorXd::Zero(dim), Eigen::VectorXd::Ones(dim)};
}

Standardizer Standardizer::fit(const PointCloud& cloud) {
  if (cloud.size() < 2) {
    throw DegenerateDataError("standardize needs at least two points");
  }
  const double n = static_cast<double>(cloud.size());
  Standardizer st;
  st.mean = cloud.points.rowwise().sum() / n;
  const Eigen::MatrixXd centered = cloud.points.colwise() - st.mean;
  st.scale = (centered.array().square().rowwise().sum() / n).sqrt().matrix();
  for (Eigen::Index k = 0; k < st.scale.size(); ++k) {
    if (!(st.scale[k] > 0.0) || !std::isfinite(st.scale[k])) {
      throw DegenerateDataError("axis " + std::to_string(k) +
                                " has zero variance");
    }
  }
  return st;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& pts) const {
  if (pts.rows() != mean.size()) {
    throw ShapeError("standardizer dimension mismatch");
  }
  return ((pts.colwise() - mean).array().colwise() / scale.array()).matrix();
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& pts) const {
  if (pts.rows() != mean.size()) {
    throw ShapeError("standardizer dimension mismatch");
  }
  return ((pts.array().colwise() * scale.array()).matrix().colwise() + mean);
}

PointCloud Standardizer::apply(const PointCloud& cloud) const {
  return PointCloud(apply(cloud.points), cloud.tags);
}

PointCloud Standardizer::invert(const PointCloud& cloud) const {
  return PointCloud(invert(cloud.points), cloud.tags);
}

Standardized standardize(const PointCloud& cloud) {
  Standardizer st = Standardizer::fit(cloud);
  return {st.apply(cloud), std::move(st)};
}

PointCloud pixels_to_cloud(const RgbImage& image) {
  if (image.width <= 0 || image.height <= 0) {
    throw FormatError("empty raster");
  }
  if (image.data.size() != image.pixel_count() * 3) {
    throw FormatError("raster is not 3-channel RGB");
  }
  const auto n = static_cast<Eigen::Index>(image.pixel_count());
  Eigen::MatrixXd pts(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < 3; ++c) {
      pts(c, i) = 2.0 * image.data[static_cast<std::size_t>(i) * 3 + c] / 255.0 - 1.0;
    }
  }
  return PointCloud(std::move(pts));
}

RgbImage cloud_to_pixels(const PointCloud& cloud, int width, int height) {
  if (width <= 0 || height <= 0 ||
      cloud.size() != static_cast<std::size_t>(width) * height) {
    throw ShapeError("cloud of " + std::to_string(cloud.size()) +
                     " points does not fill a " + std::to_string(width) +
                     "x" + std::to_string(height) + " raster");
  }
  if (cloud.dim() != 3) throw ShapeError("cloud_to_pixels needs 3D points");
  if (cloud.tags.size() != cloud.size()) {
    throw ShapeError("cloud tag count does not match point count");
  }
  if (!cloud.points.allFinite()) {
    throw NumericError("cloud_to_pixels: non-finite color value");
  }
  RgbImage image(width, height);
  std::vector<bool> filled(cloud.size(), false);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto tag = cloud.tags[i];
    if (tag < 0 || static_cast<std::size_t>(tag) >= cloud.size() ||
        filled[static_cast<std::size_t>(tag)]) {
      throw ShapeError("tags are not a permutation of pixel indices");
    }
    filled[static_cast<std::size_t>(tag)] = true;
    for (int c = 0; c < 3; ++c) {
      const double v = std::clamp(cloud.points(c, static_cast<Eigen::Index>(i)), -1.0, 1.0);
      // nearbyint honours the default round-half-to-even mode.
      const double q = std::nearbyint((v + 1.0) * 255.0 / 2.0);
      image.data[static_cast<std::size_t>(tag) * 3 + c] = static_cast<std::uint8_t>(q);
    }
  }
  return image;
}

}  // namespace ddib
