#include <cmath>
#include <limits>
#include <random>

#include "ddib/error.hpp"
#include "ddib/odesolve.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ddib;

namespace {

/// eps(x, t) = c for every input.
class ConstantField final : public NoisePredictor {
 public:
  explicit ConstantField(Eigen::VectorXd c) : c_(std::move(c)) {}
  int dim() const override { return static_cast<int>(c_.size()); }
  Eigen::MatrixXd predict_batch(const NoiseSchedule&, const Eigen::MatrixXd& x,
                                int) const override {
    return c_.replicate(1, x.cols());
  }

 private:
  Eigen::VectorXd c_;
};

class NanField final : public NoisePredictor {
 public:
  int dim() const override { return 2; }
  Eigen::MatrixXd predict_batch(const NoiseSchedule&, const Eigen::MatrixXd& x,
                                int) const override {
    return Eigen::MatrixXd::Constant(2, x.cols(), std::numeric_limits<double>::quiet_NaN());
  }
};

double mean_col_l2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).colwise().norm().mean();
}

}  // namespace

TEST_CASE("step indices") {
  const auto s = NoiseSchedule::default_linear();
  SolveSpec spec;
  spec.n_steps = 500;
  const auto idx = spec.step_indices(s);
  REQUIRE(idx.size() == 501);
  CHECK(idx.front() == 0);
  CHECK(idx.back() == 999);
  for (std::size_t k = 1; k < idx.size(); ++k) CHECK(idx[k] > idx[k - 1]);
  spec.n_steps = 999;
  const auto all = spec.step_indices(s);
  for (int k = 0; k < 1000; ++k) CHECK(all[static_cast<std::size_t>(k)] == k);
  spec.n_steps = 1;
  CHECK(spec.step_indices(s) == std::vector<int>{0, 999});
  spec.n_steps = 0;
  CHECK_THROWS_AS(spec.step_indices(s), ParameterError);
  spec.n_steps = 1000;
  CHECK_THROWS_AS(spec.step_indices(s), ParameterError);
}

TEST_CASE("a zero field only rescales") {
  const auto s = NoiseSchedule::default_linear();
  ConstantField zero(Eigen::VectorXd::Zero(2));
  const Eigen::VectorXd x = Eigen::Vector2d(0.7, -1.1);
  const Eigen::VectorXd y = ddim_step(zero, s, x, 10, 600);
  const Eigen::VectorXd expected = std::sqrt(s.alpha_bar(600) / s.alpha_bar(10)) * x;
  CHECK((y - expected).norm() < 1e-14);
  CHECK_THROWS_AS(ddim_step(zero, s, x, 5, 5), ParameterError);
}

TEST_CASE("a constant field inverts exactly") {
  const auto s = NoiseSchedule::default_linear();
  ConstantField c(Eigen::Vector2d(0.3, -0.8));
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd x = testing::random_points(2, 50, rng, -2, 2);
  for (int n : {1, 7, 100, 500}) {
    const Eigen::MatrixXd back = decode(c, s, encode(c, s, x, n), n);
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("solver agrees with a per-coordinate scalar recurrence") {
  const auto s = NoiseSchedule::default_linear();
  const auto ab = testing::linear_alpha_bars(1000, 1e-4, 0.02);
  const Eigen::VectorXd mu = Eigen::Vector2d(0.5, -0.25);
  const double var = 0.7;
  GaussianNoiseOracle oracle(mu, var);
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = testing::gaussian_points(2, 50, rng, mu, 1.0);
  for (int n : {1, 37, 500}) {
    const Eigen::MatrixXd z = encode(oracle, s, x, n);
    const Eigen::MatrixXd back = decode(oracle, s, z, n);
    const auto fwd = testing::uniform_visits(1000, n, true);
    const auto rev = testing::uniform_visits(1000, n, false);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      for (int k = 0; k < 2; ++k) {
        const double zk = testing::gaussian_ddim_scalar(x(k, j), mu[k], var, ab, fwd);
        const double bk = testing::gaussian_ddim_scalar(zk, mu[k], var, ab, rev);
        CHECK(z(k, j) == doctest::Approx(zk).epsilon(1e-10));
        CHECK(back(k, j) == doctest::Approx(bk).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("oracle round trip converges at first order") {
  const auto s = NoiseSchedule::default_linear();
  const Eigen::VectorXd mu = Eigen::Vector2d(0.5, -0.25);
  GaussianNoiseOracle oracle(mu, 1.0);
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = testing::gaussian_points(2, 300, rng, mu, 1.0);
  std::vector<double> err;
  for (int n : {50, 100, 200, 400}) {
    err.push_back(mean_col_l2(decode(oracle, s, encode(oracle, s, x, n), n), x));
  }
  for (std::size_t k = 1; k < err.size(); ++k) {
    INFO("n=" << (50 << k) << " err " << err[k - 1] << " -> " << err[k]);
    CHECK(err[k - 1] / err[k] >= 1.8);
  }
  // One-sided evaluation leaves an O(1/n) defect; at n = 999 it is still
  // a few thousandths per unit distance from the mean.
  CHECK(err.back() < 0.02);
}

TEST_CASE("Gaussian to Gaussian translation approaches the affine transport map") {
  const auto s = NoiseSchedule::default_linear();
  const Eigen::VectorXd mu1 = Eigen::Vector2d(1.0, 0.0);
  const Eigen::VectorXd mu2 = Eigen::Vector2d(-0.5, 0.75);
  const double v1 = 0.5, v2 = 2.0;
  GaussianNoiseOracle src(mu1, v1), tgt(mu2, v2);
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = testing::gaussian_points(2, 200, rng, mu1, std::sqrt(v1));
  const Eigen::MatrixXd expected =
      (std::sqrt(v2 / v1) * (x.colwise() - mu1)).colwise() + mu2;
  double prev = 1e9;
  for (int n : {100, 200, 400}) {
    const double e = mean_col_l2(decode(tgt, s, encode(src, s, x, n), n), expected);
    CHECK(e < 0.75 * prev);
    prev = e;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("a centred oracle commutes with reflection") {
  const auto s = NoiseSchedule::default_linear();
  GaussianNoiseOracle oracle(Eigen::VectorXd::Zero(2), 0.6);
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd x = testing::random_points(2, 20, rng, -1, 1);
  const Eigen::MatrixXd a = encode(oracle, s, x, 200);
  const Eigen::MatrixXd b = encode(oracle, s, -x, 200);
  CHECK((a + b).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("encoded oracle samples are standard normal") {
  const auto s = NoiseSchedule::default_linear();
  const Eigen::VectorXd mu = Eigen::Vector2d(2.0, -1.0);
  GaussianNoiseOracle oracle(mu, 0.25);
  std::mt19937_64 rng(5);
  const int n = 4000;
  const Eigen::MatrixXd z = encode(oracle, s, testing::gaussian_points(2, n, rng, mu, 0.5), 100);
  const Eigen::VectorXd mean = z.rowwise().mean();
  const Eigen::MatrixXd c = z.colwise() - mean;
  const Eigen::MatrixXd cov = c * c.transpose() / n;
  CHECK(mean.norm() < 0.1);
  CHECK(std::fabs(cov(0, 0) - 1.0) < 0.1);
  CHECK(std::fabs(cov(1, 1) - 1.0) < 0.1);
  CHECK(std::fabs(cov(0, 1)) < 0.1);
}

TEST_CASE("path bookkeeping") {
  const auto s = NoiseSchedule::default_linear();
  GaussianNoiseOracle oracle(Eigen::VectorXd::Zero(2), 1.0);
  const Eigen::MatrixXd x = Eigen::Matrix2d::Identity();
  SolveSpec spec{10, Direction::kReverse};
  const SolveResult r = ode_solve(oracle, s, x, spec, true);
  REQUIRE(r.path.size() == 11);
  CHECK(r.path_steps.front() == 999);
  CHECK(r.path_steps.back() == 0);
  CHECK(r.path.front() == x);
  CHECK(r.path.back() == r.endpoint);
  CHECK(ode_solve(oracle, s, x, spec, false).path.empty());
}

TEST_CASE("columns are independent") {
  const auto s = NoiseSchedule::default_linear();
  GaussianNoiseOracle oracle(Eigen::Vector2d(0.1, 0.2), 0.7);
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd x = testing::random_points(2, 6, rng, -1, 1);
  const Eigen::MatrixXd all = encode(oracle, s, x, 50);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd one = ode_solve(oracle, s, Eigen::VectorXd(x.col(j)), SolveSpec{50});
    CHECK((one - all.col(j)).norm() < 1e-14);
  }
}

TEST_CASE("non-finite predictions are reported") {
  const auto s = NoiseSchedule::default_linear();
  NanField nan;
  CHECK_THROWS_AS(encode(nan, s, Eigen::MatrixXd::Zero(2, 3), 10), NumericError);
  ConstantField c(Eigen::Vector3d(0, 0, 0));
  CHECK_THROWS_AS(encode(c, s, Eigen::MatrixXd::Zero(2, 3), 10), ShapeError);
}
