#include "ddib/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "ddib/error.hpp"

namespace ddib {

std::string tag_color(std::int64_t tag, std::int64_t max_tag) {
  const double frac = max_tag >= 0 ? static_cast<double>(tag) / static_cast<double>(max_tag + 1) : 0.0;
  const double h = std::fmod(300.0 * std::clamp(frac, 0.0, 1.0), 360.0) / 60.0;
  // HSV with s = 0.85, v = 0.9.
  const double v = 0.9;
  const double s = 0.85;
  const double c = v * s;
  const double x = c * (1.0 - std::fabs(std::fmod(h, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(h)) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = v - c;
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround((r + m) * 255.0)),
                static_cast<int>(std::lround((g + m) * 255.0)),
                static_cast<int>(std::lround((b + m) * 255.0)));
  return buf;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string plot_svg(const std::vector<PlotPanel>& panels,
                     const PlotOptions& options) {
  if (panels.empty()) throw ParameterError("plot needs at least one point cloud");
  if (!(options.extent > 0.0) || options.panel_size <= 0) {
    throw ParameterError("plot extent and panel size must be positive");
  }
  std::int64_t max_tag = 0;
  for (const auto& p : panels) {
    if (p.cloud.dim() < 2) throw ShapeError("plot needs at least 2D points");
    for (auto t : p.cloud.tags) max_tag = std::max(max_tag, t);
  }
  const int size = options.panel_size;
  const int title_h = 24;
  const int width = size * static_cast<int>(panels.size());
  const int height = size + title_h;
  std::string out;
  out.reserve(64 * 1024);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
                "viewBox=\"0 0 %d %d\">\n",
                width, height, width, height);
  out += buf;
  out += "<rect x=\"0\" y=\"0\" width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  const double scale = size / (2.0 * options.extent);
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const auto& panel = panels[k];
    const int x0 = size * static_cast<int>(k);
    std::snprintf(buf, sizeof buf, "<g class=\"panel\" transform=\"translate(%d,0)\">\n", x0);
    out += buf;
    out += "<text x=\"" + std::to_string(size / 2) +
           "\" y=\"17\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           escape_xml(panel.title) + "</text>\n";
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"0.5\" y=\"%d.5\" width=\"%d\" height=\"%d\" fill=\"none\" "
                  "stroke=\"#999999\"/>\n",
                  title_h, size - 1, size - 1);
    out += buf;
    for (std::size_t i = 0; i < panel.cloud.size(); ++i) {
      const double px = panel.cloud.points(0, static_cast<Eigen::Index>(i));
      const double py = panel.cloud.points(1, static_cast<Eigen::Index>(i));
      if (std::fabs(px) > options.extent || std::fabs(py) > options.extent) continue;
      const double cx = (px + options.extent) * scale;
      const double cy = title_h + (options.extent - py) * scale;
      std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"%.2f\" fill=\"%s\"/>\n",
                    cx, cy, options.radius, tag_color(panel.cloud.tags[i], max_tag).c_str());
      out += buf;
    }
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

PointCloud tag_by_angle(const PointCloud& cloud) {
  if (cloud.dim() < 2) throw ShapeError("tag_by_angle needs at least 2D points");
  const Eigen::VectorXd mean = cloud.points.rowwise().mean();
  std::vector<double> angle(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    angle[i] = std::atan2(cloud.points(1, c) - mean[1], cloud.points(0, c) - mean[0]);
  }
  std::vector<std::size_t> order(cloud.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return angle[a] < angle[b]; });
  PointCloud out = cloud;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    out.tags[order[rank]] = static_cast<std::int64_t>(rank);
  }
  return out;
}

}  // namespace ddib
