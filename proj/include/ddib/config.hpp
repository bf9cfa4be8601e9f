#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ddib/datasets.hpp"
#include "ddib/schedule.hpp"
#include "ddib/scorenet.hpp"

namespace ddib {

/// All knobs of an experiment. On disk it is a flat key = value file with
/// [section] headers; '#' and ';' start comments. Unknown sections or keys
/// are rejected.
///
///   [schedule]  steps, beta_min, beta_max
///   [network]   hidden (comma list), time_embed
///   [training]  batch_size, iterations, learning_rate, adam_beta1,
///               adam_beta2, adam_eps, ema_decay, seed, points
///   [solve]     steps
///   [datasets]  pairs (e.g. "PR:PS, M:CB"), eval_points, seed
///   [output]    dir, models
struct ExperimentConfig {
  struct Schedule {
    int steps = 1000;
    double beta_min = 1e-4;
    double beta_max = 0.02;
    bool operator==(const Schedule&) const = default;
  } schedule;

  struct Network {
    std::vector<int> hidden{128, 128, 128, 128};
    int time_embed = 64;
    bool operator==(const Network&) const = default;
  } network;

  struct Training {
    int batch_size = 256;
    long iterations = 20000;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double ema_decay = 0.999;
    std::uint64_t seed = 1;
    /// Size of the generated training set per 2D domain.
    std::size_t points = 20000;
    bool operator==(const Training&) const = default;
  } training;

  struct Solve {
    int steps = 500;
    bool operator==(const Solve&) const = default;
  } solve;

  struct Datasets {
    std::vector<std::pair<DatasetKind, DatasetKind>> pairs{
        {DatasetKind::kParallelRings, DatasetKind::kParallelSquares},
        {DatasetKind::kParallelSquares, DatasetKind::kConcentricSquares},
        {DatasetKind::kConcentricRings, DatasetKind::kParallelRings},
        {DatasetKind::kConcentricRings, DatasetKind::kConcentricSquares},
        {DatasetKind::kMoons, DatasetKind::kCheckerboards},
    };
    std::size_t eval_points = 4000;
    std::uint64_t seed = 7;
    bool operator==(const Datasets&) const = default;
  } datasets;

  struct Output {
    std::string dir = "out";
    std::string models = "models";
    bool operator==(const Output&) const = default;
  } output;

  bool operator==(const ExperimentConfig&) const = default;

  /// Throws ParameterError on out-of-range values.
  void validate() const;

  NoiseSchedule make_schedule() const;
  NetworkShape network_shape(int input_dim) const;
  TrainConfig train_config(std::uint64_t seed) const;

  /// Every distinct domain mentioned by `pairs`, in first-seen order.
  std::vector<DatasetKind> domains() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// Applies one "section.key=value" override (the same keys as the file).
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

}  // namespace ddib
