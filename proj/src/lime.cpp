#include "dtcx/lime.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "dtcx/error.hpp"

namespace dtcx::lime {
namespace {

std::string fmt2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Solves A x = b for symmetric positive-definite A by Cholesky.
std::vector<double> solve_spd(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double tol = 1e-12 * std::max(1.0, max_diag);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
    if (!(diag > tol)) {
      throw Error(ErrorCode::SingularSystem, "normal equations are rank-deficient at column " +
                                                 std::to_string(j));
    }
    const double ljj = std::sqrt(diag);
    a(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= a(i, k) * b[k];
    b[i] = s / a(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a(k, i) * b[k];
    b[i] = s / a(i, i);
  }
  return b;
}

std::string describe(const Discretizer& disc, std::span<const FeatureInfo> features,
                     std::size_t j, double value, bool discretize, const ValueFormatter& formatter) {
  const auto& col = disc.columns[j];
  const std::string& name = features[j].name;
  if (col.categorical) {
    return name + "=" + (formatter ? formatter(j, value) : fmt2(value));
  }
  if (!discretize) return name;
  const auto& e = col.edges;
  switch (disc.bin_of(j, value)) {
    case 0: return name + " <= " + fmt2(e[0]);
    case 1: return fmt2(e[0]) + " < " + name + " <= " + fmt2(e[1]);
    case 2: return fmt2(e[1]) + " < " + name + " <= " + fmt2(e[2]);
    default: return name + " > " + fmt2(e[2]);
  }
}

}  // namespace

double LimeConfig::resolved_kernel_width(std::size_t d) const {
  return kernel_width > 0.0 ? kernel_width : 0.75 * std::sqrt(static_cast<double>(d));
}

void LimeConfig::validate(std::size_t d) const {
  if (num_samples < 10) throw Error(ErrorCode::InvalidConfig, "num_samples must be >= 10");
  if (num_features < 1 || num_features > d) {
    throw Error(ErrorCode::InvalidConfig, "num_features must lie in [1, " + std::to_string(d) + "]");
  }
  if (!(ridge_lambda >= 0.0)) throw Error(ErrorCode::InvalidConfig, "ridge_lambda must be >= 0");
  if (!std::isfinite(kernel_width)) throw Error(ErrorCode::InvalidConfig, "kernel_width");
}

std::size_t Discretizer::bin_of(std::size_t feature, double value) const {
  const auto& e = columns.at(feature).edges;
  return static_cast<std::size_t>(value > e[0]) + static_cast<std::size_t>(value > e[1]) +
         static_cast<std::size_t>(value > e[2]);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Discretizer fit_discretizer(const Matrix& x_train, std::span<const FeatureInfo> features) {
  if (x_train.cols() != features.size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature list vs training matrix width");
  }
  if (x_train.rows() < 4) throw Error(ErrorCode::EmptyInput, "discretizer needs >= 4 rows");
  Discretizer disc;
  disc.columns.resize(features.size());
  const std::size_t n = x_train.rows();
  for (std::size_t j = 0; j < features.size(); ++j) {
    auto& col = disc.columns[j];
    col.categorical = features[j].categorical;
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = x_train(i, j);
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (const double v : values) ss += (v - mean) * (v - mean);
    col.mean = mean;
    col.stddev = std::sqrt(ss / static_cast<double>(n));
    if (col.stddev < 1e-12) col.stddev = 1.0;
    if (!col.categorical) {
      col.edges = {quantile(values, 0.25), quantile(values, 0.5), quantile(values, 0.75)};
    }
  }
  return disc;
}

Perturbations sample_perturbations(std::span<const double> instance, std::size_t n,
                                   const Discretizer& disc, const Matrix& x_train,
                                   bool discretize_continuous, Rng& rng) {
  const std::size_t d = disc.dim();
  if (instance.size() != d || x_train.cols() != d) {
    throw Error(ErrorCode::DimensionMismatch, "instance/training width vs discretizer");
  }
  if (n < 2) throw Error(ErrorCode::InvalidConfig, "need at least 2 perturbation rows");
  if (x_train.rows() == 0) throw Error(ErrorCode::EmptyInput, "no training rows");

  Perturbations out{Matrix(n, d), Matrix(n, d)};
  std::vector<std::size_t> instance_bin(d, 0);
  for (std::size_t j = 0; j < d; ++j) {
    if (!disc.columns[j].categorical) instance_bin[j] = disc.bin_of(j, instance[j]);
  }

  auto continuous_entry = [&](std::size_t j, double v) {
    return (v - disc.columns[j].mean) / disc.columns[j].stddev;
  };

  for (std::size_t j = 0; j < d; ++j) {
    out.model(0, j) = instance[j];
    const bool binary = disc.columns[j].categorical || discretize_continuous;
    out.interpretable(0, j) = binary ? 1.0 : continuous_entry(j, instance[j]);
  }

  // Row-major draw order keeps the stream layout independent of d-wise loops.
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto& col = disc.columns[j];
      if (!col.categorical && !discretize_continuous) {
        const double v = col.mean + col.stddev * standard_normal(rng);
        out.model(i, j) = v;
        out.interpretable(i, j) = continuous_entry(j, v);
        continue;
      }
      // A uniformly drawn training cell samples the column's empirical
      // category/bin distribution and a member of that bin at once.
      const double drawn = x_train(static_cast<std::size_t>(uniform_below(rng, x_train.rows())), j);
      const bool same = col.categorical ? drawn == instance[j]
                                        : disc.bin_of(j, drawn) == instance_bin[j];
      out.interpretable(i, j) = same ? 1.0 : 0.0;
      out.model(i, j) = same ? instance[j] : drawn;
    }
  }
  return out;
}

double kernel_weight(double distance, double width) {
  return std::exp(-(distance * distance) / (width * width));
}

SurrogateFit fit_surrogate(const Matrix& z, std::span<const double> sample_weights,
                           std::span<const double> targets, double lambda) {
  const std::size_t n = z.rows();
  const std::size_t d = z.cols();
  if (sample_weights.size() != n || targets.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "surrogate rows, weights and targets differ");
  }
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda must be >= 0");
  double wsum = 0.0;
  for (const double w : sample_weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidConfig, "negative sample weight");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw Error(ErrorCode::InvalidConfig, "all sample weights are zero");

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = sample_weights[i] * static_cast<double>(n) / wsum;
  const double wtotal = static_cast<double>(n);

  std::vector<double> zbar(d, 0.0);
  double ybar = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) zbar[j] += w[i] * z(i, j);
    ybar += w[i] * targets[i];
  }
  for (auto& v : zbar) v /= wtotal;
  ybar /= wtotal;

  Matrix gram(d, d);
  std::vector<double> rhs(d, 0.0);
  std::vector<double> zc(d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) zc[j] = z(i, j) - zbar[j];
    const double yc = targets[i] - ybar;
    for (std::size_t j = 0; j < d; ++j) {
      const double wz = w[i] * zc[j];
      rhs[j] += wz * yc;
      for (std::size_t k = 0; k <= j; ++k) gram(j, k) += wz * zc[k];
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    gram(j, j) += lambda;
    for (std::size_t k = 0; k < j; ++k) gram(k, j) = gram(j, k);
  }

  SurrogateFit fit;
  fit.coefficients = solve_spd(std::move(gram), std::move(rhs));
  fit.intercept = ybar;
  for (std::size_t j = 0; j < d; ++j) fit.intercept -= fit.coefficients[j] * zbar[j];

  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double pred = fit.intercept;
    for (std::size_t j = 0; j < d; ++j) pred += fit.coefficients[j] * z(i, j);
    ss_res += w[i] * (targets[i] - pred) * (targets[i] - pred);
    ss_tot += w[i] * (targets[i] - ybar) * (targets[i] - ybar);
  }
  fit.r2 = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

Explanation explain(const BatchPredictor& predict, std::span<const double> instance,
                    const Matrix& x_train, std::span<const FeatureInfo> features,
                    const LimeConfig& config, const ValueFormatter& formatter) {
  const std::size_t d = features.size();
  if (instance.size() != d) {
    throw Error(ErrorCode::DimensionMismatch, "instance has " + std::to_string(instance.size()) +
                                                  " values, expected " + std::to_string(d));
  }
  config.validate(d);

  const Discretizer disc = fit_discretizer(x_train, features);
  Rng rng = make_rng(config.seed, 0x11e);
  const Perturbations samples = sample_perturbations(instance, config.num_samples, disc, x_train,
                                                     config.discretize_continuous, rng);

  const std::vector<double> targets = predict(samples.model);
  if (targets.size() != config.num_samples) {
    throw Error(ErrorCode::LengthMismatch, "black box returned wrong number of outputs");
  }
  for (const double t : targets) {
    if (!std::isfinite(t)) throw Error(ErrorCode::NonFiniteModelOutput, "black box output");
  }

  const double width = config.resolved_kernel_width(d);
  std::vector<double> weights(config.num_samples);
  const auto origin = samples.interpretable.row(0);
  for (std::size_t i = 0; i < config.num_samples; ++i) {
    const auto r = samples.interpretable.row(i);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) sq += (r[j] - origin[j]) * (r[j] - origin[j]);
    weights[i] = kernel_weight(std::sqrt(sq), width);
  }

  const SurrogateFit fit = fit_surrogate(samples.interpretable, weights, targets,
                                         config.ridge_lambda);

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(fit.coefficients[a]) > std::abs(fit.coefficients[b]);
  });

  Explanation ex;
  ex.class_probabilities = {1.0 - targets[0], targets[0]};
  ex.intercept = fit.intercept;
  ex.local_r2 = fit.r2;
  ex.kernel_width = width;
  ex.num_samples = config.num_samples;
  ex.surrogate_prediction = fit.intercept;
  for (std::size_t k = 0; k < config.num_features; ++k) {
    const std::size_t j = order[k];
    ex.feature_weights.push_back(
        {j, describe(disc, features, j, instance[j], config.discretize_continuous, formatter),
         fit.coefficients[j]});
    ex.surrogate_prediction += fit.coefficients[j] * origin[j];
  }
  return ex;
}

}  // namespace dtcx::lime
