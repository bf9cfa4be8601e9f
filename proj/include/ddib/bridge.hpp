#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ddib/datasets.hpp"
#include "ddib/model_file.hpp"
#include "ddib/schedule.hpp"
#include "ddib/scorenet.hpp"

namespace ddib {

/// Per-point intermediates of a translation, stored column-aligned
/// (column i of every matrix belongs to tags[i]).
struct TranslationReport {
  std::vector<std::int64_t> tags;
  Eigen::MatrixXd source;
  Eigen::MatrixXd latent;
  Eigen::MatrixXd target;
  std::optional<Eigen::MatrixXd> reverse_latent;
  std::optional<Eigen::MatrixXd> reconstructed;
  /// Mean of ||source_i - reconstructed_i||_2; 0 when there is no
  /// reconstruction.
  double mean_roundtrip_l2 = 0.0;
  int n_steps = 0;
  std::string source_model;
  std::string target_model;

  std::size_t size() const { return tags.size(); }
  /// Per-point ||source_i - reconstructed_i||_2 (empty without reconstruction).
  std::vector<double> roundtrip_l2() const;
  /// JSON with a summary header and one record per point.
  std::string to_json() const;
};

/// Source -> latent (source model) -> target (target model). Tags carry
/// over unchanged.
PointCloud translate(const NoisePredictor& src, const NoisePredictor& tgt,
                     const NoiseSchedule& s, const PointCloud& points,
                     int n_steps);

/// translate, keeping the latent codes.
TranslationReport translate_with_report(const NoisePredictor& src,
                                        const NoisePredictor& tgt,
                                        const NoiseSchedule& s,
                                        const PointCloud& points, int n_steps);

/// A -> latent -> B -> latent -> A, recording every intermediate. Points
/// are expected in the models' standardized coordinates.
TranslationReport cycle_check(const NoisePredictor& net_a,
                              const NoisePredictor& net_b,
                              const NoiseSchedule& s, const PointCloud& points,
                              int n_steps);

/// Model-file level variants: check compatibility, map raw coordinates
/// through the source standardizer and (for translate) back out through
/// the target one. cycle_check reports in the source model's
/// standardized coordinates.
PointCloud translate(const DomainModel& src, const DomainModel& tgt,
                     const PointCloud& raw_points, int n_steps);
TranslationReport translate_with_report(const DomainModel& src,
                                        const DomainModel& tgt,
                                        const PointCloud& raw_points,
                                        int n_steps);
TranslationReport cycle_check(const DomainModel& a, const DomainModel& b,
                              const PointCloud& raw_points, int n_steps);

}  // namespace ddib
