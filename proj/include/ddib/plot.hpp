#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddib/datasets.hpp"

namespace ddib {

struct PlotPanel {
  std::string title;
  PointCloud cloud;  // only the first two coordinates are drawn
};

struct PlotOptions {
  /// Every panel shows [-extent, extent]^2.
  double extent = 3.5;
  int panel_size = 320;
  double radius = 1.6;
};

/// "#rrggbb" fill for a tag. Hue runs over 300 degrees as tag / (max_tag + 1)
/// so clouds with tags ordered along a curve show a smooth rainbow.
std::string tag_color(std::int64_t tag, std::int64_t max_tag);

/// Side-by-side scatter panels as a standalone SVG document. Colors are
/// keyed on tags, so the same point has the same color in every panel.
std::string plot_svg(const std::vector<PlotPanel>& panels,
                     const PlotOptions& options = {});

/// Relabels a cloud so tag order follows the polar angle about the cloud
/// mean; gives the rainbow coloring a spatial meaning.
PointCloud tag_by_angle(const PointCloud& cloud);

}  // namespace ddib
