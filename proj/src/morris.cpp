#include "dtcx/morris.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numeric>

#include "dtcx/error.hpp"
#include "dtcx/random.hpp"

namespace dtcx::morris {

double MorrisConfig::resolved_delta() const {
  if (delta > 0.0) return delta;
  const auto p = static_cast<double>(levels);
  return p / (2.0 * (p - 1.0));
}

void MorrisConfig::validate() const {
  if (levels < 2 || levels % 2 != 0) {
    throw Error(ErrorCode::InvalidConfig, "levels must be even and >= 2");
  }
  const double dl = resolved_delta();
  if (!(dl > 0.0 && dl < 1.0)) throw Error(ErrorCode::InvalidConfig, "delta must lie in (0, 1)");
  if (trajectories < 2) throw Error(ErrorCode::TooFewTrajectories, "need at least 2 trajectories");
}

std::vector<FeatureRange> ranges_from(const Matrix& x) {
  if (x.rows() == 0) throw Error(ErrorCode::EmptyInput, "ranges of empty matrix");
  std::vector<FeatureRange> out(x.cols());
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double lo = x(0, j);
    double hi = x(0, j);
    for (std::size_t i = 1; i < x.rows(); ++i) {
      lo = std::min(lo, x(i, j));
      hi = std::max(hi, x(i, j));
    }
    out[j] = {lo, hi};
  }
  return out;
}

std::vector<Trajectory> generate_trajectories(std::size_t d, const MorrisConfig& config) {
  config.validate();
  if (d == 0) throw Error(ErrorCode::InvalidConfig, "zero-dimensional input");
  const double delta = config.resolved_delta();
  const double grid_step = 1.0 / static_cast<double>(config.levels - 1);
  // Base levels k / (p-1) with k / (p-1) <= 1 - delta.
  std::vector<double> base_levels;
  for (std::size_t k = 0; k < config.levels; ++k) {
    const double v = static_cast<double>(k) * grid_step;
    if (v <= 1.0 - delta + 1e-12) base_levels.push_back(v);
  }

  std::vector<Trajectory> out(config.trajectories);
  for (std::size_t t = 0; t < config.trajectories; ++t) {
    Rng rng = make_rng(config.seed, 0x30000 + t);
    auto& traj = out[t];
    traj.points = Matrix(d + 1, d);
    traj.step.resize(d);
    std::vector<double> direction(d);
    for (std::size_t j = 0; j < d; ++j) {
      const double base = base_levels[uniform_below(rng, base_levels.size())];
      const bool up = uniform_below(rng, 2) == 0;
      direction[j] = up ? delta : -delta;
      traj.points(0, j) = up ? base : base + delta;
    }
    traj.order = permutation(d, rng);
    for (std::size_t k = 0; k < d; ++k) {
      const std::size_t j = traj.order[k];
      const auto prev = traj.points.row(k);
      auto next = traj.points.row(k + 1);
      std::copy(prev.begin(), prev.end(), next.begin());
      // Land exactly on the grid endpoint the start point was built from.
      next[j] = direction[j] > 0.0 ? prev[j] + delta : prev[j] - delta;
      if (direction[j] < 0.0 && next[j] < 0.0) next[j] = 0.0;
      if (direction[j] > 0.0 && next[j] > 1.0) next[j] = 1.0;
      traj.step[k] = direction[j];
    }
  }
  return out;
}

namespace {

void effects_for(const BatchFunction& f, const Trajectory& traj,
                 std::span<const FeatureRange> ranges, std::span<double> out_row) {
  const std::size_t d = ranges.size();
  Matrix x(d + 1, d);
  for (std::size_t k = 0; k <= d; ++k) {
    for (std::size_t j = 0; j < d; ++j) {
      const auto& r = ranges[j];
      x(k, j) = r.lo + traj.points(k, j) * (r.hi - r.lo);
    }
  }
  const std::vector<double> y = f(x);
  if (y.size() != d + 1) throw Error(ErrorCode::LengthMismatch, "model output count");
  for (const double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteModelOutput, "model output");
  }
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t j = traj.order[k];
    out_row[j] = ranges[j].degenerate() ? 0.0 : (y[k + 1] - y[k]) / traj.step[k];
  }
}

}  // namespace

Matrix elementary_effects(const BatchFunction& f, std::span<const Trajectory> trajectories,
                          std::span<const FeatureRange> ranges, Execution execution) {
  const std::size_t d = ranges.size();
  for (const auto& t : trajectories) {
    if (t.points.rows() != d + 1 || t.points.cols() != d || t.order.size() != d) {
      throw Error(ErrorCode::DimensionMismatch, "trajectory shape vs feature ranges");
    }
  }
  Matrix effects(trajectories.size(), d);
  if (execution == Execution::Serial) {
    for (std::size_t t = 0; t < trajectories.size(); ++t) {
      effects_for(f, trajectories[t], ranges, effects.row(t));
    }
    return effects;
  }

  // Exceptions must not escape an OpenMP region; keep the first and rethrow.
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto count = static_cast<std::ptrdiff_t>(trajectories.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    if (failed.load(std::memory_order_relaxed)) continue;
    try {
      const auto idx = static_cast<std::size_t>(t);
      effects_for(f, trajectories[idx], ranges, effects.row(idx));
    } catch (...) {
#pragma omp critical(dtcx_morris_failure)
      {
        if (!failure) failure = std::current_exception();
      }
      failed.store(true, std::memory_order_relaxed);
    }
  }
  if (failure) std::rethrow_exception(failure);
  return effects;
}

MorrisResult aggregate(const Matrix& effects, std::span<const std::string> names) {
  const std::size_t r = effects.rows();
  const std::size_t d = effects.cols();
  if (r < 2) throw Error(ErrorCode::TooFewTrajectories, "need at least 2 trajectories");
  if (names.size() != d) throw Error(ErrorCode::LengthMismatch, "names vs effect columns");

  MorrisResult res;
  res.features.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    double abs_sum = 0.0;
    for (std::size_t t = 0; t < r; ++t) {
      sum += effects(t, j);
      abs_sum += std::abs(effects(t, j));
    }
    const double mu = sum / static_cast<double>(r);
    double ss = 0.0;
    for (std::size_t t = 0; t < r; ++t) ss += (effects(t, j) - mu) * (effects(t, j) - mu);
    res.features[j] = {names[j], mu, abs_sum / static_cast<double>(r),
                       std::sqrt(ss / static_cast<double>(r - 1))};
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return res.features[a].mu_star > res.features[b].mu_star;
  });
  for (const auto j : order) res.ranking.push_back(names[j]);
  return res;
}

MorrisResult analyze(const BatchFunction& f, const Matrix& x_train,
                     std::span<const std::string> names, const MorrisConfig& config,
                     Execution execution) {
  const auto ranges = ranges_from(x_train);
  const auto trajectories = generate_trajectories(x_train.cols(), config);
  const Matrix effects = elementary_effects(f, trajectories, ranges, execution);
  MorrisResult res = aggregate(effects, names);
  res.evaluations = trajectories.size() * (x_train.cols() + 1);
  return res;
}

}  // namespace dtcx::morris
