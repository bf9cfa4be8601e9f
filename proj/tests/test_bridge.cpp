#include <algorithm>
#include <cmath>
#include <random>

#include "ddib/bridge.hpp"
#include "ddib/error.hpp"
#include "ddib/odesolve.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ddib;

namespace {

PointCloud shuffled_tags(Eigen::MatrixXd pts, std::uint64_t seed) {
  std::vector<std::int64_t> tags(static_cast<std::size_t>(pts.cols()));
  for (std::size_t i = 0; i < tags.size(); ++i) tags[i] = static_cast<std::int64_t>(100 + 3 * i);
  std::shuffle(tags.begin(), tags.end(), std::mt19937_64(seed));
  return PointCloud(std::move(pts), std::move(tags));
}

DomainModel oracle_like_model(const std::string& name, const NoiseSchedule& s, int dim) {
  return DomainModel{name, s, ScoreNetwork(NetworkShape{dim, 4, {8}}), Standardizer::identity(dim), 0};
}

}  // namespace

TEST_CASE("translating with the same model twice is a round trip") {
  const auto s = NoiseSchedule::default_linear();
  GaussianNoiseOracle oracle(Eigen::Vector2d(0.2, 0.1), 0.8);
  std::mt19937_64 rng(1);
  const PointCloud pts = shuffled_tags(testing::random_points(2, 100, rng, -1, 1), 9);
  const PointCloud out = translate(oracle, oracle, s, pts, 500);
  CHECK(out.tags == pts.tags);
  CHECK((out.points - pts.points).colwise().norm().mean() < 1e-2);
}

TEST_CASE("oracle cycle matches the scalar recurrence") {
  const auto s = NoiseSchedule::default_linear();
  const auto ab = testing::linear_alpha_bars(1000, 1e-4, 0.02);
  const Eigen::Vector2d mu_a(1, 1), mu_b(-1, 0);
  GaussianNoiseOracle a(mu_a, 0.5);
  GaussianNoiseOracle b(mu_b, 2.0);
  std::mt19937_64 rng(2);
  const PointCloud pts(testing::gaussian_points(2, 200, rng, mu_a, std::sqrt(0.5)));
  const TranslationReport r = cycle_check(a, b, s, pts, 500);
  REQUIRE(r.reconstructed.has_value());
  REQUIRE(r.reverse_latent.has_value());
  CHECK(r.size() == 200);
  const auto fwd = testing::uniform_visits(1000, 500, true);
  const auto rev = testing::uniform_visits(1000, 500, false);
  double mean_l2 = 0.0;
  for (Eigen::Index j = 0; j < 200; ++j) {
    Eigen::Vector2d back;
    for (int k = 0; k < 2; ++k) {
      double v = testing::gaussian_ddim_scalar(pts.points(k, j), mu_a[k], 0.5, ab, fwd);
      v = testing::gaussian_ddim_scalar(v, mu_b[k], 2.0, ab, rev);
      CHECK(r.target(k, j) == doctest::Approx(v).epsilon(1e-10));
      v = testing::gaussian_ddim_scalar(v, mu_b[k], 2.0, ab, fwd);
      back[k] = testing::gaussian_ddim_scalar(v, mu_a[k], 0.5, ab, rev);
    }
    mean_l2 += (back - pts.points.col(j)).norm() / 200.0;
  }
  CHECK(r.mean_roundtrip_l2 == doctest::Approx(mean_l2).epsilon(1e-8));
  const auto per_point = r.roundtrip_l2();
  double mean = 0.0;
  for (double v : per_point) mean += v / per_point.size();
  CHECK(mean == doctest::Approx(r.mean_roundtrip_l2).epsilon(1e-12));
  CHECK(r.mean_roundtrip_l2 < 0.05);
}

TEST_CASE("cycle error shrinks with more steps") {
  const auto s = NoiseSchedule::default_linear();
  GaussianNoiseOracle a(Eigen::Vector2d(0, 1), 0.3);
  GaussianNoiseOracle b(Eigen::Vector2d(0, -1), 1.5);
  std::mt19937_64 rng(3);
  const PointCloud pts(testing::gaussian_points(2, 100, rng, Eigen::Vector2d(0, 1), std::sqrt(0.3)));
  double prev = cycle_check(a, b, s, pts, 25).mean_roundtrip_l2;
  for (int n : {50, 100, 200, 400}) {
    const double e = cycle_check(a, b, s, pts, n).mean_roundtrip_l2;
    CHECK(e < prev);
    prev = e;
  }
}

TEST_CASE("permuting the input permutes the output") {
  const auto s = NoiseSchedule::default_linear();
  GaussianNoiseOracle a(Eigen::Vector2d(0.5, 0), 1.0);
  GaussianNoiseOracle b(Eigen::Vector2d(0, 0.5), 0.4);
  std::mt19937_64 rng(4);
  const PointCloud pts(testing::random_points(2, 30, rng, -1, 1));
  std::vector<Eigen::Index> perm(30);
  for (Eigen::Index i = 0; i < 30; ++i) perm[static_cast<std::size_t>(i)] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  PointCloud permuted;
  permuted.points.resize(2, 30);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    permuted.points.col(static_cast<Eigen::Index>(i)) = pts.points.col(perm[i]);
    permuted.tags.push_back(pts.tags[static_cast<std::size_t>(perm[i])]);
  }
  const PointCloud out = translate(a, b, s, pts, 100);
  const PointCloud out_p = translate(a, b, s, permuted, 100);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    CHECK(out_p.tags[i] == out.tags[static_cast<std::size_t>(perm[i])]);
    CHECK((out_p.points.col(static_cast<Eigen::Index>(i)) - out.points.col(perm[i])).norm() < 1e-14);
  }
}

TEST_CASE("translation is deterministic and matches encode then decode") {
  const auto s = NoiseSchedule::default_linear();
  GaussianNoiseOracle a(Eigen::Vector2d(0, 0), 1.0);
  GaussianNoiseOracle b(Eigen::Vector2d(1, 0), 0.5);
  std::mt19937_64 rng(5);
  const PointCloud pts(testing::random_points(2, 10, rng, -1, 1));
  const TranslationReport r1 = translate_with_report(a, b, s, pts, 60);
  const TranslationReport r2 = translate_with_report(a, b, s, pts, 60);
  CHECK(r1.target == r2.target);
  CHECK(r1.latent == encode(a, s, pts.points, 60));
  CHECK(r1.target == decode(b, s, r1.latent, 60));
  CHECK_FALSE(r1.reconstructed.has_value());
  CHECK(r1.mean_roundtrip_l2 == 0.0);
  CHECK(r1.to_json() == r2.to_json());
}

TEST_CASE("models must share a schedule and dimension") {
  const auto s1 = NoiseSchedule::default_linear();
  const auto s2 = NoiseSchedule::linear(500, 1e-4, 0.02);
  const PointCloud pts(Eigen::MatrixXd::Zero(2, 3));
  CHECK_THROWS_AS(translate(oracle_like_model("a", s1, 2), oracle_like_model("b", s2, 2), pts, 10),
                  CompatibilityError);
  CHECK_THROWS_AS(translate(oracle_like_model("a", s1, 2), oracle_like_model("b", s1, 3), pts, 10),
                  CompatibilityError);
  CHECK_NOTHROW(translate(oracle_like_model("a", s1, 2), oracle_like_model("b", s1, 2), pts, 10));
  GaussianNoiseOracle o2(Eigen::Vector2d(0, 0), 1.0);
  CHECK_THROWS_AS(translate(o2, o2, s1, PointCloud(Eigen::MatrixXd::Zero(3, 2)), 10), ShapeError);
}

TEST_CASE("model-level translation maps through both standardizers") {
  const auto s = NoiseSchedule::default_linear();
  // Zero networks: the latent is a pure rescaling, so the whole bridge is
  // raw -> standardized(src) -> unstandardized(tgt).
  DomainModel src = oracle_like_model("src", s, 2);
  DomainModel tgt = oracle_like_model("tgt", s, 2);
  src.standardizer.mean = Eigen::Vector2d(1, 2);
  src.standardizer.scale = Eigen::Vector2d(2, 4);
  tgt.standardizer.mean = Eigen::Vector2d(-1, 0);
  tgt.standardizer.scale = Eigen::Vector2d(0.5, 0.5);
  const PointCloud raw(Eigen::Matrix2d{{3, 1}, {6, 2}});
  const PointCloud out = translate(src, tgt, raw, 20);
  CHECK(out.points(0, 0) == doctest::Approx(-1 + 0.5 * 1.0));
  CHECK(out.points(1, 0) == doctest::Approx(0 + 0.5 * 1.0));
  CHECK(out.points(0, 1) == doctest::Approx(-1 + 0.5 * 0.0));
  CHECK(out.points(1, 1) == doctest::Approx(0 + 0.5 * 0.0));
  const TranslationReport r = cycle_check(src, tgt, raw, 20);
  CHECK(r.mean_roundtrip_l2 < 1e-12);
  CHECK(r.source(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("report JSON carries one record per point") {
  const auto s = NoiseSchedule::default_linear();
  GaussianNoiseOracle a(Eigen::Vector2d(0, 0), 1.0);
  const PointCloud pts = shuffled_tags(Eigen::MatrixXd::Ones(2, 4), 1);
  const std::string json = cycle_check(a, a, s, pts, 10).to_json();
  for (auto tag : pts.tags) CHECK(json.find("\"tag\": " + std::to_string(tag)) != std::string::npos);
  CHECK(json.find("mean_roundtrip_l2") != std::string::npos);
}
