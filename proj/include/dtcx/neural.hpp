#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dtcx/matrix.hpp"
#include "dtcx/random.hpp"

// Dense feed-forward binary classifier trained with mini-batch Adam on
// binary cross-entropy. Forward and backward passes are written out
// explicitly; the heavy lifting is in dtcx::kernels.
namespace dtcx::neural {

enum class Activation { ReLU, Sigmoid };

struct DenseLayer {
  Matrix weights;             // d_in x d_out
  std::vector<double> bias;   // d_out
  Activation activation = Activation::ReLU;
  double dropout = 0.0;       // applied to this layer's output; hidden layers only

  std::size_t in_dim() const noexcept { return weights.rows(); }
  std::size_t out_dim() const noexcept { return weights.cols(); }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct Mlp {
  std::vector<DenseLayer> layers;

  std::size_t in_dim() const noexcept { return layers.empty() ? 0 : layers.front().in_dim(); }
  std::size_t parameter_count() const noexcept;
  // Throws ShapeMismatch when shapes do not chain or the head is not 1-unit sigmoid.
  void validate() const;
  friend bool operator==(const Mlp&, const Mlp&) = default;
};

// Gradients mirror the layer parameter shapes.
struct LayerGrad {
  Matrix weights;
  std::vector<double> bias;
};
using Gradients = std::vector<LayerGrad>;

enum class ValidationSource { FromTrain, FromTestAsPaper };

struct TrainConfig {
  double learning_rate = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double dropout = 0.5;
  double validation_fraction = 0.2;
  ValidationSource validation_source = ValidationSource::FromTrain;
  std::uint64_t seed = 1;

  void validate() const;
};

struct AdamState {
  std::vector<std::vector<double>> m;  // one entry per parameter tensor
  std::vector<std::vector<double>> v;
  std::uint64_t t = 0;
};

struct EpochRecord {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  // False when no validation rows were available; val fields are then 0.
  bool has_validation = false;
};

enum class Mode { Train, Infer };

// Per-layer state cached by forward() for backward().
struct ForwardCache {
  std::vector<Matrix> inputs;       // input to each layer (post-mask of previous)
  std::vector<Matrix> pre;          // pre-activation z of each layer
  std::vector<Matrix> masks;        // inverted-dropout masks (empty when unused)
  std::vector<double> probabilities;
};

// Hidden layers get `dropout`; weights Glorot-uniform, zero biases.
Mlp init_mlp(std::size_t d_in, std::span<const std::size_t> hidden, std::uint64_t seed,
             double dropout = 0.5);

// In Train mode hidden activations are multiplied by an inverted-dropout mask
// drawn from `rng`; Infer mode ignores `rng`.
ForwardCache forward(const Mlp& mlp, const Matrix& x, Mode mode, Rng* rng = nullptr);

inline constexpr double kProbabilityClamp = 1e-7;

double bce_loss(std::span<const double> p, std::span<const int> y);

// Gradient of the clamped mean BCE over the cached batch.
Gradients backward(const Mlp& mlp, const ForwardCache& cache, std::span<const int> y);

AdamState init_adam(const Mlp& mlp);

// One Adam update over a flat parameter tensor; exposed for testing.
void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t t, const TrainConfig& config);

// t <- t+1 then updates every tensor of `mlp`.
void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state, const TrainConfig& config);

struct ValidationData {
  const Matrix* x = nullptr;
  std::span<const int> y;
};

struct TrainResult {
  Mlp model;
  TrainHistory history;
};

// Fixed-epoch training. When `validation` is empty and the source is
// FromTrain, validation rows are carved from the tail of a seeded shuffle of
// the training rows and excluded from fitting.
TrainResult train(Mlp mlp, const Matrix& x_train, std::span<const int> y_train,
                  const TrainConfig& config, std::optional<ValidationData> validation = {});

std::vector<double> predict_proba(const Mlp& mlp, const Matrix& x);

inline constexpr double kDecisionThreshold = 0.5;
// 1 when p > 0.5.
std::vector<int> predict_labels(std::span<const double> p);

}  // namespace dtcx::neural
