#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ddib/config.hpp"
#include "ddib/datasets.hpp"
#include "ddib/image.hpp"
#include "ddib/model_file.hpp"
#include "ddib/ot.hpp"

namespace ddib {

using Logger = std::function<void(const std::string&)>;

/// splitmix64 of base mixed with an FNV-1a hash of label. Gives every
/// domain and purpose its own stream.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

PointCloud domain_training_data(DatasetKind kind, const ExperimentConfig& cfg);
/// Held-out sample (different seed stream from the training data).
PointCloud domain_eval_data(DatasetKind kind, const ExperimentConfig& cfg,
                            std::size_t n);

/// Standardizes raw_data, initializes a network and trains it. The model
/// never sees any data but raw_data.
DomainModel train_domain(const std::string& name, const PointCloud& raw_data,
                         const ExperimentConfig& cfg, std::uint64_t seed,
                         const TrainObserver& observer = {});

DomainModel train_dataset_model(DatasetKind kind, const ExperimentConfig& cfg,
                                const TrainObserver& observer = {});

std::filesystem::path model_path(const ExperimentConfig& cfg, DatasetKind kind);

struct CycleRow {
  DatasetKind a;
  DatasetKind b;
  double mean_l2 = 0.0;
  std::size_t points = 0;
  int n_steps = 0;
};

struct CycleTable {
  std::vector<CycleRow> rows;
  std::string to_csv() const;
  std::string to_text() const;
};

CycleTable cycle_table(const ExperimentConfig& cfg,
                       const std::map<DatasetKind, DomainModel>& models);

/// Loads every model under cfg.output.models. Missing models are trained
/// and saved when train_missing is set; otherwise MissingModelError names
/// the train command to run.
std::map<DatasetKind, DomainModel> load_domain_models(const ExperimentConfig& cfg,
                                                      bool train_missing,
                                                      const Logger& log = {});

enum class ColorMethod { kDdib, kEmd, kSinkhorn, kLinear };
ColorMethod parse_color_method(std::string_view name);
std::string color_method_name(ColorMethod m);

struct ColorTransferOptions {
  ExperimentConfig config;
  /// Pixel subsample for the OT baselines.
  std::size_t sample_size = 1000;
  std::uint64_t seed = 0;
  /// Entropic regularization for the Sinkhorn baseline, in [-1,1]^3 units.
  double sinkhorn_epsilon = 1e-3;
  /// Regularization of the plan behind the linear map estimate.
  double linear_epsilon = 1e-2;
  std::filesystem::path cache_dir = ".ddib-cache";
  bool train_if_missing = false;
};

/// Cache directory from $DDIB_CACHE_DIR, else ".ddib-cache".
std::filesystem::path default_cache_dir();

/// Cache key of an image model: hash of the image bytes and every setting
/// that affects training.
std::string image_model_key(const RgbImage& image, const ExperimentConfig& cfg);

/// Per-image color model (3D), from cache or freshly trained.
DomainModel image_model(const RgbImage& image, const ColorTransferOptions& options,
                        const Logger& log = {});

RgbImage transfer_ddib(const DomainModel& subject_model,
                       const DomainModel& reference_model,
                       const RgbImage& subject, int n_steps);

/// OT baselines: a color map estimated on pixel subsamples, applied to
/// every subject pixel.
RgbImage transfer_ot(const RgbImage& reference, const RgbImage& subject,
                     ColorMethod method, const ColorTransferOptions& options);

struct ColorTransferResult {
  std::map<ColorMethod, RgbImage> outputs;
  /// pixel_mse(DDIB output, method output) for every OT baseline.
  std::map<ColorMethod, double> mse_vs_ddib;
  std::string to_json() const;
};

/// Runs DDIB and all three OT baselines.
ColorTransferResult run_color_transfer(const RgbImage& reference,
                                       const RgbImage& subject,
                                       const ColorTransferOptions& options,
                                       const Logger& log = {});

}  // namespace ddib
