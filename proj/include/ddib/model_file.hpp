#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "ddib/datasets.hpp"
#include "ddib/schedule.hpp"
#include "ddib/scorenet.hpp"

namespace ddib {

inline constexpr int kModelSchemaVersion = 1;

/// A trained single-domain model together with everything needed to apply
/// it to raw coordinates: the schedule it was trained under and the
/// standardizer fitted on its training data.
struct DomainModel {
  std::string name;
  NoiseSchedule schedule;
  ScoreNetwork net;
  Standardizer standardizer;
  std::uint64_t training_seed = 0;
};

/// JSON text: header fields first, then "weights" as a flat array of
/// decimals that parse back to the identical doubles.
std::string serialize_model(const DomainModel& model);
DomainModel parse_model(const std::string& text);

void save_model(const std::filesystem::path& path, const DomainModel& model);
DomainModel load_model(const std::filesystem::path& path);

/// Two models can share a latent space only if they were trained under the
/// same schedule on points of the same dimension. Throws CompatibilityError.
void check_compatible(const DomainModel& a, const DomainModel& b);

}  // namespace ddib
