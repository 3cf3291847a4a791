#include "dtcx/metrics.hpp"

#include <cstdio>

#include "dtcx/error.hpp"

namespace dtcx::metrics {
namespace {

Metric ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(y_true.size()) + " labels vs " +
                                               std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw Error(ErrorCode::EmptyInput, "confusion of empty vectors");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool actual = y_true[i] != 0;
    const bool predicted = y_pred[i] != 0;
    if (actual && predicted) ++cm.tp;
    else if (!actual && predicted) ++cm.fp;
    else if (!actual) ++cm.tn;
    else ++cm.fn;
  }
  return cm;
}

MetricsReport compute_metrics(const ConfusionMatrix& cm) {
  MetricsReport r;
  r.accuracy = ratio(cm.tp + cm.tn, cm.total());
  r.sensitivity = ratio(cm.tp, cm.tp + cm.fn);
  r.specificity = ratio(cm.tn, cm.tn + cm.fp);
  r.ppv = ratio(cm.tp, cm.tp + cm.fp);
  r.npv = ratio(cm.tn, cm.tn + cm.fn);
  return r;
}

ConfusionMatrix swap_classes(const ConfusionMatrix& cm) noexcept {
  return {.tp = cm.tn, .fp = cm.fn, .tn = cm.tp, .fn = cm.fp};
}

std::string format_metric(const Metric& m) {
  if (!m) return "undefined";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *m);
  return buf;
}

}  // namespace dtcx::metrics
