#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace dtcx::metrics {

// Class 1 (recurrence) is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

// nullopt marks a metric whose denominator is zero.
using Metric = std::optional<double>;

struct MetricsReport {
  Metric accuracy;
  Metric sensitivity;
  Metric specificity;
  Metric ppv;
  Metric npv;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred);
MetricsReport compute_metrics(const ConfusionMatrix& cm);

// Same counts with the roles of the two classes exchanged.
ConfusionMatrix swap_classes(const ConfusionMatrix& cm) noexcept;

// Fixed 4-decimal text, or "undefined".
std::string format_metric(const Metric& m);

}  // namespace dtcx::metrics
