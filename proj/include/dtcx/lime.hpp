#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dtcx/matrix.hpp"
#include "dtcx/random.hpp"

// Local surrogate explanations for tabular binary classifiers.
//
// Perturbed neighbours of an instance are drawn feature-by-feature from the
// training marginals, mapped to a binary "same bin/category as the instance"
// representation, weighted by an exponential kernel on that representation,
// and fitted with a weighted ridge regression on the black box's P(class 1).
namespace dtcx::lime {

// Returns P(class 1) for every row of the input.
using BatchPredictor = std::function<std::vector<double>(const Matrix&)>;

// Optional pretty-printer for categorical values in descriptors.
using ValueFormatter = std::function<std::string(std::size_t feature, double value)>;

struct FeatureInfo {
  std::string name;
  bool categorical = false;
};

struct LimeConfig {
  std::size_t num_samples = 5000;
  double kernel_width = 0.0;  // <= 0 selects 0.75 * sqrt(d)
  std::size_t num_features = 10;
  double ridge_lambda = 1.0;
  std::uint64_t seed = 1;
  bool discretize_continuous = true;

  double resolved_kernel_width(std::size_t d) const;
  void validate(std::size_t d) const;
};

struct Discretizer {
  struct Column {
    bool categorical = false;
    std::array<double, 3> edges{};  // q25, q50, q75; numeric columns only
    double mean = 0.0;
    double stddev = 1.0;
  };
  std::vector<Column> columns;

  std::size_t dim() const noexcept { return columns.size(); }
  // 0..3 for numeric columns: the count of edges strictly below `value`.
  std::size_t bin_of(std::size_t feature, double value) const;
};

// Linear-interpolation quantile of an unsorted sample, q in [0, 1].
double quantile(std::vector<double> values, double q);

Discretizer fit_discretizer(const Matrix& x_train, std::span<const FeatureInfo> features);

struct Perturbations {
  Matrix interpretable;  // n x d
  Matrix model;          // n x d, model input space
};

// Row 0 is the instance itself. With discretization off, numeric columns of
// `interpretable` hold the sampled value standardized by training statistics.
Perturbations sample_perturbations(std::span<const double> instance, std::size_t n,
                                   const Discretizer& discretizer, const Matrix& x_train,
                                   bool discretize_continuous, Rng& rng);

double kernel_weight(double distance, double width);

struct SurrogateFit {
  std::vector<double> coefficients;
  double intercept = 0.0;
  double r2 = 0.0;  // weighted coefficient of determination
};

// Weighted ridge with an unpenalized intercept (weighted centering). Sample
// weights are normalised to mean 1 so the fit is invariant to their scale.
SurrogateFit fit_surrogate(const Matrix& z, std::span<const double> sample_weights,
                           std::span<const double> targets, double lambda);

struct FeatureWeight {
  std::size_t feature = 0;
  std::string descriptor;
  double weight = 0.0;

  friend bool operator==(const FeatureWeight&, const FeatureWeight&) = default;
};

struct Explanation {
  std::size_t instance_index = 0;
  std::pair<double, double> class_probabilities{0.0, 0.0};
  std::vector<FeatureWeight> feature_weights;  // |weight| descending
  double intercept = 0.0;
  double local_r2 = 0.0;
  double surrogate_prediction = 0.0;
  double kernel_width = 0.0;
  std::size_t num_samples = 0;

  friend bool operator==(const Explanation&, const Explanation&) = default;
};

Explanation explain(const BatchPredictor& predict, std::span<const double> instance,
                    const Matrix& x_train, std::span<const FeatureInfo> features,
                    const LimeConfig& config, const ValueFormatter& formatter = {});

}  // namespace dtcx::lime
