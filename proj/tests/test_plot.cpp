#include <chrono>
#include <regex>

#include "ddib/csv.hpp"
#include "ddib/datasets.hpp"
#include "ddib/error.hpp"
#include "ddib/plot.hpp"
#include "doctest.h"

using namespace ddib;

namespace {

std::size_t count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("one panel per cloud, one circle per visible point") {
  const PointCloud c(Eigen::Matrix<double, 2, 3>{{0, 1, 100}, {0, 1, 0}});
  const std::string svg = plot_svg({{"a", c}});
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(count(svg, "class=\"panel\"") == 1);
  CHECK(count(svg, "<circle") == 2);  // the point at x=100 is off-canvas
  const std::string two = plot_svg({{"a", c}, {"b", c}});
  CHECK(count(two, "class=\"panel\"") == 2);
}

TEST_CASE("a tag has the same color in every panel") {
  const PointCloud src(Eigen::Matrix<double, 2, 3>{{0, 1, 2}, {0, 0, 0}}, {0, 1, 2});
  const PointCloud dst(Eigen::Matrix<double, 2, 3>{{-1, -2, -3}, {1, 1, 1}}, {2, 0, 1});
  const std::string svg = plot_svg({{"src", src}, {"dst", dst}});
  for (std::int64_t t = 0; t < 3; ++t) CHECK(count(svg, "fill=\"" + tag_color(t, 2) + "\"") == 2);
  CHECK(tag_color(0, 2) != tag_color(1, 2));
  CHECK(std::regex_match(tag_color(1, 9), std::regex("#[0-9a-f]{6}")));
}

TEST_CASE("angle tagging") {
  const PointCloud c(Eigen::Matrix<double, 2, 4>{{1, 0, -1, 0}, {0, -1, 0, 1}});
  const PointCloud t = tag_by_angle(c);
  CHECK(t.points == c.points);
  // Angles run from -pi: (0,-1), (1,0), (0,1), (-1,0).
  CHECK(t.tags == std::vector<std::int64_t>{1, 0, 3, 2});
}

TEST_CASE("4000-point plots are quick and small") {
  const PointCloud c = generate(DatasetKind::kMoons, 4000, 1);
  const auto start = std::chrono::steady_clock::now();
  const std::string svg = plot_svg({{"a", c}, {"b", c}});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 1.0);
  CHECK(svg.size() < 5u * 1024 * 1024);
}

TEST_CASE("point CSV") {
  const PointCloud c(Eigen::Matrix<double, 2, 2>{{0.1, -3.0}, {1e-300, 2.5}}, {7, 3});
  const std::string text = format_points_csv(c);
  CHECK(text.rfind("x0,x1,tag\n", 0) == 0);
  const PointCloud back = parse_points_csv(text);
  CHECK(back.points == c.points);
  CHECK(back.tags == c.tags);
  try {
    (void)parse_points_csv("x0,x1,tag\n1,2,0\n1,oops,1\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_points_csv("x0,x1,tag\n1,2\n"), ParseError);
  CHECK_THROWS_AS(parse_points_csv("a,b\n"), ParseError);
  CHECK_THROWS_AS(parse_points_csv("x0,tag\n1,0\n2,0\n"), Error);
  CHECK(format_real(0.1) == "0.1");
}
