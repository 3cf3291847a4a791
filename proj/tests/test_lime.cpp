#include <gtest/gtest.h>

#include <cmath>

#include "dtcx/error.hpp"
#include "dtcx/lime.hpp"

namespace dtcx::lime {
namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<double> logistic_box(const Matrix& x) {
  std::vector<double> p(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) p[i] = sigmoid(3.0 * x(i, 0) - 2.0 * x(i, 1));
  return p;
}

Matrix gaussian_training(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Matrix x(n, d);
  for (double& v : x.flat()) v = standard_normal(rng);
  return x;
}

Matrix binary_training(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Matrix x(n, d);
  for (double& v : x.flat()) v = uniform01(rng) < 0.5 ? -1.0 : 1.0;
  return x;
}

TEST(Quantile, LinearInterpolation) {
  const std::vector<double> v{8, 3, 1, 5, 2, 7, 4, 6};
  EXPECT_DOUBLE_EQ(quantile(v, 0.25), 2.75);
  EXPECT_DOUBLE_EQ(quantile(v, 0.5), 4.5);
  EXPECT_DOUBLE_EQ(quantile(v, 0.75), 6.25);
}

TEST(Discretizer, EdgesConstantAndCategoricalColumns) {
  Matrix x(8, 3);
  for (std::size_t i = 0; i < 8; ++i) {
    x(i, 0) = static_cast<double>(i + 1);
    x(i, 1) = 4.0;
    x(i, 2) = static_cast<double>(i % 3);
  }
  const FeatureInfo f[] = {{"a", false}, {"b", false}, {"c", true}};
  const Discretizer d = fit_discretizer(x, f);
  EXPECT_EQ(d.columns[0].edges, (std::array<double, 3>{2.75, 4.5, 6.25}));
  EXPECT_EQ(d.columns[1].edges, (std::array<double, 3>{4.0, 4.0, 4.0}));
  EXPECT_TRUE(d.columns[2].categorical);
  EXPECT_EQ(d.bin_of(0, 1.0), 0u);
  EXPECT_EQ(d.bin_of(0, 2.75), 0u);
  EXPECT_EQ(d.bin_of(0, 3.0), 1u);
  EXPECT_EQ(d.bin_of(0, 100.0), 3u);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(d.bin_of(1, x(i, 1)), 0u);
  EXPECT_THROW(fit_discretizer(Matrix(3, 3), f), Error);
}

TEST(Perturbations, ShapeInstanceRowAndMembership) {
  Matrix x = gaussian_training(200, 3, 4);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    x(i, 1) = static_cast<double>(i % 4) - 1.5;  // categorical codes
    x(i, 2) = 0.25;                              // single category
  }
  const FeatureInfo f[] = {{"num", false}, {"cat", true}, {"one", true}};
  const Discretizer disc = fit_discretizer(x, f);
  const double instance[] = {0.3, 0.5, 0.25};
  Rng rng = make_rng(1);
  const auto s = sample_perturbations(instance, 500, disc, x, true, rng);
  ASSERT_EQ(s.interpretable.rows(), 500u);
  ASSERT_EQ(s.interpretable.cols(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(s.interpretable(0, j), 1.0);
    EXPECT_EQ(s.model(0, j), instance[j]);
  }
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < 500; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const double z = s.interpretable(i, j);
      EXPECT_TRUE(z == 0.0 || z == 1.0);
    }
    const double cat = s.model(i, 1);
    EXPECT_TRUE(cat == -1.5 || cat == -0.5 || cat == 0.5 || cat == 1.5);
    EXPECT_EQ(s.interpretable(i, 1) == 1.0, cat == 0.5);
    EXPECT_EQ(s.interpretable(i, 2), 1.0);
    EXPECT_EQ(s.interpretable(i, 0) == 1.0, disc.bin_of(0, s.model(i, 0)) == disc.bin_of(0, 0.3));
    mismatches += s.interpretable(i, 0) == 0.0;
  }
  EXPECT_GT(mismatches, 250u);  // instance bin holds about a quarter of the mass
}

TEST(Perturbations, ContinuousModeUsesStandardizedValues) {
  const Matrix x = gaussian_training(300, 2, 6);
  const FeatureInfo f[] = {{"a", false}, {"b", false}};
  const Discretizer disc = fit_discretizer(x, f);
  const double instance[] = {0.4, -0.2};
  Rng rng = make_rng(2);
  const auto s = sample_perturbations(instance, 50, disc, x, false, rng);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      EXPECT_NEAR(s.interpretable(i, j),
                  (s.model(i, j) - disc.columns[j].mean) / disc.columns[j].stddev, 1e-12);
}

TEST(Kernel, ExponentialShape) {
  EXPECT_EQ(kernel_weight(0.0, 0.8), 1.0);
  EXPECT_NEAR(kernel_weight(0.8, 0.8), 0.36787944117144233, 1e-15);
  double prev = 2.0;
  for (double d = 0.0; d < 5.0; d += 0.25) {
    const double w = kernel_weight(d, 1.3);
    EXPECT_LT(w, prev);
    prev = w;
  }
}

TEST(Surrogate, RecoversExactLinearTargets) {
  Rng rng = make_rng(17);
  Matrix z(300, 3);
  std::vector<double> w(300), y(300);
  const double beta[] = {0.4, -1.25, 2.0};
  for (std::size_t i = 0; i < 300; ++i) {
    for (std::size_t j = 0; j < 3; ++j) z(i, j) = uniform_below(rng, 2) == 0 ? 0.0 : 1.0;
    w[i] = 0.05 + uniform01(rng);
    y[i] = 0.3 + beta[0] * z(i, 0) + beta[1] * z(i, 1) + beta[2] * z(i, 2);
  }
  const auto fit = fit_surrogate(z, w, y, 1e-8);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(fit.coefficients[j], beta[j], 1e-4);
  EXPECT_NEAR(fit.intercept, 0.3, 1e-4);
  EXPECT_GT(fit.r2, 0.999999);
}

TEST(Surrogate, ConstantTargetsAndWeightScaleInvariance) {
  Rng rng = make_rng(3);
  Matrix z(100, 4);
  std::vector<double> w(100), y(100, 0.7), y2(100);
  for (std::size_t i = 0; i < 100; ++i) {
    for (std::size_t j = 0; j < 4; ++j) z(i, j) = uniform_below(rng, 2) == 0 ? 0.0 : 1.0;
    w[i] = uniform01(rng);
    y2[i] = uniform01(rng);
  }
  const auto flat = fit_surrogate(z, w, y, 1.0);
  for (const double c : flat.coefficients) EXPECT_NEAR(c, 0.0, 1e-8);
  EXPECT_NEAR(flat.intercept, 0.7, 1e-8);

  std::vector<double> doubled(w);
  for (double& v : doubled) v *= 2.0;
  const auto a = fit_surrogate(z, w, y2, 1.0);
  const auto b = fit_surrogate(z, doubled, y2, 1.0);
  for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(a.coefficients[j], b.coefficients[j], 1e-12);
}

TEST(Surrogate, SingularOnlyWithoutRidge) {
  Matrix z(10, 2);
  std::vector<double> w(10, 1.0), y(10);
  for (std::size_t i = 0; i < 10; ++i) {
    z(i, 0) = static_cast<double>(i % 2);
    z(i, 1) = z(i, 0);  // duplicate column
    y[i] = static_cast<double>(i);
  }
  try {
    fit_surrogate(z, w, y, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularSystem);
  }
  EXPECT_NO_THROW(fit_surrogate(z, w, y, 1e-3));
  std::vector<double> zeros(10, 0.0);
  EXPECT_THROW(fit_surrogate(z, zeros, y, 1.0), Error);
}

TEST(Explain, LogisticOracleSignsAndRanking) {
  const Matrix x = gaussian_training(500, 2, 99);
  const FeatureInfo f[] = {{"x1", false}, {"x2", false}};
  LimeConfig cfg;
  cfg.num_features = 2;
  cfg.ridge_lambda = 1e-6;
  const double instance[] = {1.5, 1.5};  // top quartile of both features
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    cfg.seed = seed;
    const auto ex = explain(logistic_box, instance, x, f, cfg);
    ASSERT_EQ(ex.feature_weights.size(), 2u);
    EXPECT_EQ(ex.feature_weights[0].feature, 0u) << "seed " << seed;
    EXPECT_GT(ex.feature_weights[0].weight, 0.0);
    EXPECT_LT(ex.feature_weights[1].weight, 0.0);
    EXPECT_NEAR(ex.class_probabilities.first + ex.class_probabilities.second, 1.0, 1e-12);
  }
}

TEST(Explain, ConstantBlackBox) {
  const Matrix x = gaussian_training(200, 4, 5);
  const FeatureInfo f[] = {{"a", false}, {"b", false}, {"c", false}, {"d", false}};
  LimeConfig cfg;
  cfg.num_features = 4;
  const auto ex = explain([](const Matrix& m) { return std::vector<double>(m.rows(), 0.7); },
                          std::vector<double>{0.1, 0.2, 0.3, 0.4}, x, f, cfg);
  for (const auto& w : ex.feature_weights) EXPECT_NEAR(w.weight, 0.0, 1e-6);
  EXPECT_NEAR(ex.intercept, 0.7, 1e-9);
  EXPECT_NEAR(ex.surrogate_prediction, 0.7, 1e-6);
}

TEST(Explain, LinearInInterpretableFeaturesIsFitExactly) {
  const Matrix x = binary_training(400, 3, 8);
  const FeatureInfo f[] = {{"a", true}, {"b", true}, {"c", true}};
  LimeConfig cfg;
  cfg.num_features = 3;
  cfg.ridge_lambda = 1e-6;
  const auto box = [](const Matrix& m) {
    std::vector<double> p(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) p[i] = 0.5 + 0.2 * m(i, 0) - 0.1 * m(i, 1) + 0.05 * m(i, 2);
    return p;
  };
  const auto ex = explain(box, std::vector<double>{1.0, 1.0, -1.0}, x, f, cfg);
  EXPECT_GT(ex.local_r2, 0.99);
  // Leaving the instance's category moves a by -2 units: weight 0.4.
  EXPECT_NEAR(ex.feature_weights[0].weight, 0.4, 1e-5);
  EXPECT_EQ(ex.feature_weights[0].descriptor, "a=1.00");
}

TEST(Explain, DeterministicLengthAndDescriptors) {
  const Matrix x = gaussian_training(300, 5, 12);
  const FeatureInfo f[] = {{"v0", false}, {"v1", false}, {"v2", false}, {"v3", false}, {"v4", false}};
  LimeConfig cfg;
  cfg.num_features = 3;
  cfg.num_samples = 800;
  const std::vector<double> inst{0.0, -2.0, 2.0, 0.5, -0.5};
  const auto box = [](const Matrix& m) {
    std::vector<double> p(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) p[i] = sigmoid(m(i, 0) + m(i, 1) * m(i, 2));
    return p;
  };
  const auto a = explain(box, inst, x, f, cfg);
  const auto b = explain(box, inst, x, f, cfg);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.feature_weights.size(), 3u);
  for (std::size_t k = 1; k < a.feature_weights.size(); ++k)
    EXPECT_GE(std::abs(a.feature_weights[k - 1].weight), std::abs(a.feature_weights[k].weight));
  double pred = a.intercept;
  for (const auto& w : a.feature_weights) pred += w.weight;
  EXPECT_NEAR(a.surrogate_prediction, pred, 1e-12);
  cfg.seed = 2;
  EXPECT_NE(explain(box, inst, x, f, cfg), a);
}

TEST(Explain, ConfigValidation) {
  const Matrix x = gaussian_training(50, 2, 1);
  const FeatureInfo f[] = {{"a", false}, {"b", false}};
  LimeConfig cfg;
  cfg.num_features = 3;
  EXPECT_THROW(explain(logistic_box, std::vector<double>{0, 0}, x, f, cfg), Error);
  cfg.num_features = 2;
  cfg.num_samples = 5;
  EXPECT_THROW(explain(logistic_box, std::vector<double>{0, 0}, x, f, cfg), Error);
  cfg.num_samples = 100;
  EXPECT_THROW(explain(logistic_box, std::vector<double>{0}, x, f, cfg), Error);
  EXPECT_DOUBLE_EQ(cfg.resolved_kernel_width(16), 3.0);
}

}  // namespace
}  // namespace dtcx::lime
