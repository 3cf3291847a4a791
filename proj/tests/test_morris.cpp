#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "dtcx/error.hpp"
#include "dtcx/morris.hpp"
#include "dtcx/random.hpp"

namespace dtcx::morris {
namespace {

std::vector<double> linear(const Matrix& x, std::span<const double> a) {
  std::vector<double> y(x.rows(), 0.0);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) y[i] += a[j] * x(i, j);
  return y;
}

Matrix unit_box(std::size_t d) {
  Matrix x(2, d);
  for (std::size_t j = 0; j < d; ++j) x(1, j) = 1.0;
  return x;
}

std::vector<std::string> names_for(std::size_t d) {
  std::vector<std::string> n;
  for (std::size_t j = 0; j < d; ++j) n.push_back("f" + std::to_string(j));
  return n;
}

TEST(Trajectories, OneFactorAtATimeOnTheGrid) {
  MorrisConfig cfg;
  cfg.trajectories = 50;
  const double delta = cfg.resolved_delta();
  EXPECT_DOUBLE_EQ(delta, 2.0 / 3.0);
  const auto trajs = generate_trajectories(7, cfg);
  ASSERT_EQ(trajs.size(), 50u);
  const std::set<double> grid{0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
  for (const auto& t : trajs) {
    ASSERT_EQ(t.points.rows(), 8u);
    std::vector<std::size_t> order = t.order;
    std::sort(order.begin(), order.end());
    for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(order[j], j);
    for (std::size_t k = 0; k <= 7; ++k) {
      for (std::size_t j = 0; j < 7; ++j) {
        const double v = t.points(k, j);
        bool on_grid = false;
        for (const double g : grid) on_grid |= std::abs(v - g) < 1e-12;
        EXPECT_TRUE(on_grid) << v;
      }
    }
    for (std::size_t k = 0; k < 7; ++k) {
      std::size_t changed = 0;
      for (std::size_t j = 0; j < 7; ++j) {
        if (t.points(k + 1, j) != t.points(k, j)) {
          ++changed;
          EXPECT_EQ(j, t.order[k]);
          EXPECT_NEAR(t.points(k + 1, j) - t.points(k, j), t.step[k], 1e-12);
        }
      }
      EXPECT_EQ(changed, 1u);
      EXPECT_NEAR(std::abs(t.step[k]), delta, 1e-15);
    }
  }
}

TEST(Trajectories, DeterministicPerSeed) {
  MorrisConfig cfg;
  cfg.trajectories = 5;
  const auto a = generate_trajectories(4, cfg);
  const auto b = generate_trajectories(4, cfg);
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].points, b[t].points);
    EXPECT_EQ(a[t].order, b[t].order);
  }
  cfg.seed = 2;
  const auto c = generate_trajectories(4, cfg);
  bool differs = false;
  for (std::size_t t = 0; t < a.size(); ++t) differs |= !(a[t].points == c[t].points);
  EXPECT_TRUE(differs);
}

TEST(Effects, LinearFunctionIsExact) {
  const std::vector<double> a{3.0, -1.0, 0.0, 0.5};
  MorrisConfig cfg;
  cfg.trajectories = 30;
  const auto trajs = generate_trajectories(4, cfg);
  const auto ranges = ranges_from(unit_box(4));
  const Matrix ee = elementary_effects([&](const Matrix& x) { return linear(x, a); }, trajs, ranges);
  for (std::size_t t = 0; t < ee.rows(); ++t)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(ee(t, j), a[j], 1e-12);
  const auto res = aggregate(ee, names_for(4));
  EXPECT_NEAR(res.features[0].mu_star, 3.0, 1e-12);
  EXPECT_NEAR(res.features[1].mu, -1.0, 1e-12);
  EXPECT_NEAR(res.features[1].mu_star, 1.0, 1e-12);
  EXPECT_NEAR(res.features[0].sigma, 0.0, 1e-12);
  EXPECT_EQ(res.ranking, (std::vector<std::string>{"f0", "f1", "f3", "f2"}));
}

TEST(Effects, ConstantFunctionAndInteraction) {
  MorrisConfig cfg;
  cfg.trajectories = 40;
  const auto trajs = generate_trajectories(3, cfg);
  const auto ranges = ranges_from(unit_box(3));
  const Matrix flat = elementary_effects(
      [](const Matrix& x) { return std::vector<double>(x.rows(), 4.2); }, trajs, ranges);
  for (const double v : flat.flat()) EXPECT_EQ(v, 0.0);

  const auto product = [](const Matrix& x) {
    std::vector<double> y(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) y[i] = x(i, 0) * x(i, 1);
    return y;
  };
  const auto res = aggregate(elementary_effects(product, trajs, ranges), names_for(3));
  EXPECT_GT(res.features[0].sigma, 0.05);
  EXPECT_GT(res.features[1].sigma, 0.05);
  EXPECT_EQ(res.features[2].mu_star, 0.0);
  EXPECT_EQ(res.ranking.back(), "f2");
}

TEST(Effects, RangesScaleEffects) {
  Matrix box(2, 2);
  box(0, 0) = -2.0;
  box(1, 0) = 8.0;
  box(0, 1) = 5.0;
  box(1, 1) = 5.0;  // degenerate
  const std::vector<double> a{1.5, 7.0};
  MorrisConfig cfg;
  cfg.trajectories = 10;
  const auto res = analyze([&](const Matrix& x) { return linear(x, a); }, box, names_for(2), cfg);
  EXPECT_NEAR(res.features[0].mu_star, 15.0, 1e-10);
  EXPECT_EQ(res.features[1].mu_star, 0.0);
  EXPECT_EQ(res.evaluations, 30u);
}

TEST(Aggregate, HandComputed) {
  Matrix ee(2, 2);
  ee(0, 0) = 1.0;
  ee(1, 0) = -1.0;
  ee(0, 1) = 2.5;
  ee(1, 1) = 2.5;
  const auto res = aggregate(ee, names_for(2));
  EXPECT_EQ(res.features[0].mu, 0.0);
  EXPECT_EQ(res.features[0].mu_star, 1.0);
  EXPECT_DOUBLE_EQ(res.features[0].sigma, std::sqrt(2.0));
  EXPECT_EQ(res.features[1].mu, 2.5);
  EXPECT_EQ(res.features[1].sigma, 0.0);
  EXPECT_EQ(res.ranking, (std::vector<std::string>{"f1", "f0"}));
}

TEST(Aggregate, TiesKeepSchemaOrder) {
  Matrix ee(3, 3, 1.0);
  const auto res = aggregate(ee, names_for(3));
  EXPECT_EQ(res.ranking, names_for(3));
}

TEST(Properties, ScalingMuStarBoundAndExecutionAgreement) {
  Rng rng = make_rng(77);
  const std::size_t d = 6;
  Matrix box(40, d);
  for (double& v : box.flat()) v = standard_normal(rng);
  const auto f = [](const Matrix& x) {
    std::vector<double> y(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i)
      y[i] = std::tanh(x(i, 0) - 0.5 * x(i, 1) * x(i, 2)) + 0.3 * x(i, 3) * x(i, 3);
    return y;
  };
  const auto scaled = [&](const Matrix& x) {
    auto y = f(x);
    for (double& v : y) v *= -2.5;
    return y;
  };
  MorrisConfig cfg;
  cfg.trajectories = 60;
  const auto names = names_for(d);
  const auto serial = analyze(f, box, names, cfg, Execution::Serial);
  const auto parallel = analyze(f, box, names, cfg, Execution::Parallel);
  const auto big = analyze(scaled, box, names, cfg);
  for (std::size_t j = 0; j < d; ++j) {
    EXPECT_EQ(serial.features[j].mu, parallel.features[j].mu);
    EXPECT_EQ(serial.features[j].mu_star, parallel.features[j].mu_star);
    EXPECT_EQ(serial.features[j].sigma, parallel.features[j].sigma);
    EXPECT_GE(serial.features[j].mu_star + 1e-15, std::abs(serial.features[j].mu));
    EXPECT_NEAR(big.features[j].mu_star, 2.5 * serial.features[j].mu_star, 1e-9);
    EXPECT_NEAR(big.features[j].sigma, 2.5 * serial.features[j].sigma, 1e-9);
  }
  EXPECT_EQ(serial.ranking, parallel.ranking);
  EXPECT_EQ(serial.features[4].mu_star, 0.0);
  EXPECT_EQ(serial.evaluations, 60u * 7u);
}

TEST(Errors, ConfigurationAndModelFailures) {
  MorrisConfig cfg;
  cfg.trajectories = 1;
  try {
    generate_trajectories(3, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewTrajectories);
  }
  EXPECT_THROW(aggregate(Matrix(1, 2), names_for(2)), Error);
  cfg.trajectories = 4;
  cfg.levels = 3;
  EXPECT_THROW(cfg.validate(), Error);
  cfg.levels = 4;
  const auto trajs = generate_trajectories(2, cfg);
  const auto ranges = ranges_from(unit_box(2));
  const auto bad = [](const Matrix& x) { return std::vector<double>(x.rows(), std::nan("")); };
  for (const auto mode : {Execution::Serial, Execution::Parallel}) {
    try {
      elementary_effects(bad, trajs, ranges, mode);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::NonFiniteModelOutput);
    }
  }
}

}  // namespace
}  // namespace dtcx::morris
