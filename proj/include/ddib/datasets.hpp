#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ddib/image.hpp"

namespace ddib {

/// Ordered point set. Coordinates are stored one point per column
/// (dim x n) so that batches feed straight into the network.
/// tags carry point identity through encode/decode/translate.
struct PointCloud {
  Eigen::MatrixXd points;
  std::vector<std::int64_t> tags;

  PointCloud() = default;
  PointCloud(Eigen::MatrixXd pts, std::vector<std::int64_t> t);
  /// Tags 0..n-1.
  explicit PointCloud(Eigen::MatrixXd pts);

  int dim() const { return static_cast<int>(points.rows()); }
  std::size_t size() const { return static_cast<std::size_t>(points.cols()); }
  Eigen::VectorXd point(std::size_t i) const { return points.col(static_cast<Eigen::Index>(i)); }

  /// Throws ShapeError on tag/point count mismatch, duplicate tags or
  /// non-finite coordinates.
  void validate() const;
};

enum class DatasetKind {
  kMoons,
  kCheckerboards,
  kConcentricRings,
  kConcentricSquares,
  kParallelRings,
  kParallelSquares,
  kGaussian,
};

/// Accepts full names ("moons", "concentric-rings", ...) and the short
/// legend codes (M, CB, CR, CS, PR, PS). Case-insensitive.
DatasetKind parse_dataset_kind(std::string_view name);
std::string dataset_name(DatasetKind kind);
std::string dataset_code(DatasetKind kind);

/// Raw samples from a 2D toy distribution. Mixture components alternate
/// with the point index, so every component gets n/2 points. Shapes:
///   moons          upper half circle r=1 at (0,0), lower half at (1,0.5)
///   checkerboards  8 dark cells of a 4x4 board on [-2,2]^2
///   c. rings       radii 1 and 2 about the origin
///   c. squares     half-widths 1 and 2 about the origin
///   p. rings       radius 0.8 circles at (-1.2,0) and (1.2,0)
///   p. squares     half-width 0.8 squares at (-1.2,0) and (1.2,0)
///   gaussian       N(0, I)
/// Every shape except gaussian gets isotropic N(0, 0.05^2) jitter.
PointCloud generate(DatasetKind kind, std::size_t n, std::uint64_t seed);

inline constexpr double kDatasetJitter = 0.05;

/// Per-axis affine normalization x -> (x - mean) / scale.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardizer identity(int dim);
  /// Population statistics (denominator n). Throws DegenerateDataError on a
  /// zero-variance axis or fewer than two points.
  static Standardizer fit(const PointCloud& cloud);

  PointCloud apply(const PointCloud& cloud) const;
  PointCloud invert(const PointCloud& cloud) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const;
  Eigen::MatrixXd invert(const Eigen::MatrixXd& points) const;
};

struct Standardized {
  PointCloud cloud;
  Standardizer standardizer;
};

Standardized standardize(const PointCloud& cloud);

/// One 3D point per pixel with channels mapped 2v/255 - 1 into [-1, 1];
/// tag = row-major pixel index.
PointCloud pixels_to_cloud(const RgbImage& image);

/// Inverse of pixels_to_cloud: clamp to [-1, 1], map to [0, 255], round
/// half to even. Pixel placement follows the tags, which must be a
/// permutation of 0..width*height-1.
RgbImage cloud_to_pixels(const PointCloud& cloud, int width, int height);

}  // namespace ddib
