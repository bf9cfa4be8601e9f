#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ddib/datasets.hpp"
#include "ddib/image.hpp"

namespace ddib {

/// Coupling between two uniformly weighted point sets under squared
/// Euclidean cost.
struct TransportPlan {
  Eigen::MatrixXd coupling;        // n x m, nonnegative
  double cost = 0.0;               // <coupling, C>
  Eigen::VectorXd source_weights;  // n, sums to 1
  Eigen::VectorXd target_weights;  // m, sums to 1
  /// Sum of |row sum - source weight| + |column sum - target weight|.
  double marginal_violation = 0.0;
  int iterations = 0;  // Sinkhorn only
  /// <f, a> + <g, b> for Sinkhorn plans: the entropic objective
  /// <P, C> + eps KL(P | a b^T) at the optimum. Equals cost for EMD.
  double regularized_cost = 0.0;
};

/// n x m matrix of ||x_i - y_j||^2 for points stored one per column.
Eigen::MatrixXd squared_euclidean_cost(const Eigen::MatrixXd& x,
                                       const Eigen::MatrixXd& y);

inline constexpr std::size_t kEmdMaxPoints = 4096;

/// Exact OT with uniform weights. Square instances are solved as an
/// assignment problem (shortest augmenting paths, O(n^3)); rectangular
/// ones as an integer transportation problem by successive shortest paths.
/// Throws CapacityError above kEmdMaxPoints points per side.
TransportPlan emd(const PointCloud& source, const PointCloud& target);

/// Optimal assignment for a square cost matrix: result[i] is the column
/// matched to row i.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

struct SinkhornOptions {
  double epsilon = 0.05;
  int max_iters = 10000;
  /// Stop once the L1 marginal violation is at most tol.
  double tol = 1e-6;
  /// Geometric epsilon annealing from the cost scale down to epsilon.
  bool epsilon_scaling = true;
};

/// Entropic OT by log-domain alternating scaling. Throws ConvergenceError
/// (carrying the final violation) when max_iters is exhausted.
TransportPlan sinkhorn(const PointCloud& source, const PointCloud& target,
                       const SinkhornOptions& options);
TransportPlan sinkhorn(const PointCloud& source, const PointCloud& target,
                       double epsilon, int max_iters = 10000, double tol = 1e-6);

/// Entropic objective W(a, a) of a cloud against itself (uniform weights).
/// Same options and ConvergenceError as sinkhorn().
double sinkhorn_self_cost(const PointCloud& cloud, const SinkhornOptions& options);

/// Debiased Sinkhorn divergence
///   S(a, b) = W(a, b) - (W(a, a) + W(b, b)) / 2
/// with W the entropic objective.
double sinkhorn_divergence(const PointCloud& a, const PointCloud& b,
                           const SinkhornOptions& options);

/// y = A x + b.
struct AffineMap {
  Eigen::MatrixXd linear;
  Eigen::VectorXd offset;

  Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const;
  PointCloud apply(const PointCloud& cloud) const;
};

/// Point i -> sum_j coupling(i, j) * target_j / source_weights(i).
/// Keeps the source tags.
PointCloud barycentric_map(const TransportPlan& plan, const PointCloud& source,
                           const PointCloud& target);

/// Two stages: a Sinkhorn plan between the clouds, then the least-squares
/// affine fit from each source point to its barycentric image.
AffineMap linear_map_estimate(const PointCloud& source, const PointCloud& target,
                              const SinkhornOptions& options);

enum class PlanMethod { kSinkhorn, kEmd };

/// Color correspondence estimated on pixel subsamples, extended to arbitrary
/// colors by nearest-anchor displacement: a color c whose nearest subject
/// anchor is s_k maps to c + (bary(s_k) - s_k).
struct ColorMap {
  Eigen::MatrixXd anchors;        // 3 x k subject sample
  Eigen::MatrixXd displacements;  // 3 x k

  Eigen::MatrixXd apply(const Eigen::MatrixXd& colors) const;
  PointCloud apply(const PointCloud& cloud) const;
};

struct ColorConvertOptions {
  std::size_t sample_size = 1000;
  std::uint64_t seed = 0;
  PlanMethod method = PlanMethod::kSinkhorn;
  SinkhornOptions sinkhorn{1e-3, 10000, 1e-6, true};
};

/// Pixel clouds are 3D. sample_size is capped at kEmdMaxPoints.
ColorMap color_convert(const PointCloud& reference, const PointCloud& subject,
                       const ColorConvertOptions& options = {});

/// Deterministic sample of min(k, n) distinct indices (in sampled order).
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k,
                                        std::uint64_t seed);

/// Mean over pixels and channels of the squared difference after mapping
/// both images to [-1, 1].
double pixel_mse(const RgbImage& a, const RgbImage& b);

}  // namespace ddib
