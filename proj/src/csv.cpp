#include "ddib/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ddib/error.hpp"

namespace ddib {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

PointCloud parse_points_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") != std::string::npos) break;
  }
  header = split(line);
  if (header.size() < 2 || header.back() != "tag") {
    throw ParseError("line " + std::to_string(line_no) +
                     ": expected header x0,...,tag");
  }
  const std::size_t dim = header.size() - 1;
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[k] != "x" + std::to_string(k)) {
      throw ParseError("line " + std::to_string(line_no) + ": header column " +
                       std::to_string(k) + " should be x" + std::to_string(k));
    }
  }
  std::vector<double> coords;
  std::vector<std::int64_t> tags;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto fields = split(line);
    if (fields.size() != dim + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(dim + 1) + " fields, got " +
                       std::to_string(fields.size()));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      double v = 0.0;
      const auto& f = fields[k];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size() || !std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line_no) + ": bad number '" + f + "'");
      }
      coords.push_back(v);
    }
    std::int64_t tag = 0;
    const auto& f = fields[dim];
    const auto res = std::from_chars(f.data(), f.data() + f.size(), tag);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": bad tag '" + f + "'");
    }
    tags.push_back(tag);
  }
  if (tags.empty()) throw ParseError("point file contains no points");
  Eigen::MatrixXd pts = Eigen::Map<Eigen::MatrixXd>(
      coords.data(), static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(tags.size()));
  PointCloud cloud(std::move(pts), std::move(tags));
  try {
    cloud.validate();
  } catch (const ShapeError& e) {
    throw ParseError(e.what());
  }
  return cloud;
}

PointCloud read_points_csv(const std::filesystem::path& path) {
  return parse_points_csv(read_text_file(path));
}

std::string format_points_csv(const PointCloud& cloud) {
  std::string out;
  for (int k = 0; k < cloud.dim(); ++k) out += "x" + std::to_string(k) + ",";
  out += "tag\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    for (int k = 0; k < cloud.dim(); ++k) {
      out += format_real(cloud.points(k, static_cast<Eigen::Index>(i)));
      out += ',';
    }
    out += std::to_string(cloud.tags[i]);
    out += '\n';
  }
  return out;
}

void write_points_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  write_text_file(path, format_points_csv(cloud));
}

std::string format_trace_csv(const std::vector<int>& steps,
                             const std::vector<Eigen::MatrixXd>& path,
                             const std::vector<std::int64_t>& tags) {
  std::string out = "step,tag";
  const Eigen::Index dim = path.empty() ? 0 : path.front().rows();
  for (Eigen::Index k = 0; k < dim; ++k) out += ",x" + std::to_string(k);
  out += '\n';
  for (std::size_t s = 0; s < path.size(); ++s) {
    for (Eigen::Index j = 0; j < path[s].cols(); ++j) {
      out += std::to_string(steps[s]) + "," + std::to_string(tags[static_cast<std::size_t>(j)]);
      for (Eigen::Index k = 0; k < dim; ++k) {
        out += ',';
        out += format_real(path[s](k, j));
      }
      out += '\n';
    }
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ddib
