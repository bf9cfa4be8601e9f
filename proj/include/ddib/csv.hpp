#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ddib/datasets.hpp"

namespace ddib {

/// Point files: header "x0,x1,...,x{d-1},tag", one point per line.
/// Reals are written with 17 significant digits so files round-trip.
PointCloud parse_points_csv(const std::string& text);
PointCloud read_points_csv(const std::filesystem::path& path);
std::string format_points_csv(const PointCloud& cloud);
void write_points_csv(const std::filesystem::path& path, const PointCloud& cloud);

/// Trajectory dump: "step,tag,x0,...". path[k] is the state after
/// visiting steps[k].
std::string format_trace_csv(const std::vector<int>& steps,
                             const std::vector<Eigen::MatrixXd>& path,
                             const std::vector<std::int64_t>& tags);

/// Shortest decimal that parses back to the same double.
std::string format_real(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace ddib
