#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dtcx/matrix.hpp"

// Morris elementary-effects screening over a box in model space.
namespace dtcx::morris {

// Evaluates a scalar model output for every row of the input.
using BatchFunction = std::function<std::vector<double>(const Matrix&)>;

struct MorrisConfig {
  std::size_t levels = 4;
  double delta = 0.0;  // <= 0 selects levels / (2 (levels - 1))
  std::size_t trajectories = 100;
  std::uint64_t seed = 1;

  double resolved_delta() const;
  void validate() const;
};

struct FeatureRange {
  double lo = 0.0;
  double hi = 1.0;
  bool degenerate() const noexcept { return hi - lo < 1e-12; }
};

struct Trajectory {
  Matrix points;                     // (d+1) x d in [0,1]^d
  std::vector<std::size_t> order;    // coordinate changed at step k
  std::vector<double> step;          // signed unit-space step at k (+delta or -delta)
};

struct FeatureIndices {
  std::string name;
  double mu = 0.0;
  double mu_star = 0.0;
  double sigma = 0.0;
};

struct MorrisResult {
  std::vector<FeatureIndices> features;  // schema order
  std::vector<std::string> ranking;      // names by mu_star descending, ties by schema order
  std::size_t evaluations = 0;
};

enum class Execution { Serial, Parallel };

std::vector<FeatureRange> ranges_from(const Matrix& x);

// Each trajectory draws from its own substream, so the set is identical no
// matter how it is later evaluated.
std::vector<Trajectory> generate_trajectories(std::size_t d, const MorrisConfig& config);

// r x d matrix of elementary effects. Unit points map to x = lo + u (hi - lo);
// degenerate features get EE 0. In Parallel mode trajectories are evaluated
// concurrently, so `f` must be safe to call from several threads.
Matrix elementary_effects(const BatchFunction& f, std::span<const Trajectory> trajectories,
                          std::span<const FeatureRange> ranges,
                          Execution execution = Execution::Parallel);

MorrisResult aggregate(const Matrix& effects, std::span<const std::string> names);

MorrisResult analyze(const BatchFunction& f, const Matrix& x_train,
                     std::span<const std::string> names, const MorrisConfig& config,
                     Execution execution = Execution::Parallel);

}  // namespace dtcx::morris
