#include "dtcx/neural.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dtcx/error.hpp"
#include "dtcx/kernels.hpp"

namespace dtcx::neural {
namespace {

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

bool inside_clamp(double p) noexcept {
  return p > kProbabilityClamp && p < 1.0 - kProbabilityClamp;
}

double accuracy_of(std::span<const double> p, std::span<const int> y) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    hits += static_cast<std::size_t>((p[i] > kDecisionThreshold ? 1 : 0) == y[i]);
  }
  return p.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(p.size());
}

}  // namespace

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers) n += l.weights.size() + l.bias.size();
  return n;
}

void Mlp::validate() const {
  if (layers.empty()) throw Error(ErrorCode::ShapeMismatch, "network has no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    if (layer.bias.size() != layer.out_dim() || layer.in_dim() == 0) {
      throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " bias/weight shape");
    }
    if (l > 0 && layers[l - 1].out_dim() != layer.in_dim()) {
      throw Error(ErrorCode::ShapeMismatch, "layer " + std::to_string(l) + " does not chain");
    }
    const bool last = l + 1 == layers.size();
    if (last && (layer.out_dim() != 1 || layer.activation != Activation::Sigmoid)) {
      throw Error(ErrorCode::ShapeMismatch, "output layer must be a single sigmoid unit");
    }
    if (!last && layer.activation != Activation::ReLU) {
      throw Error(ErrorCode::ShapeMismatch, "hidden layers must use ReLU");
    }
    if (!(layer.dropout >= 0.0 && layer.dropout < 1.0)) {
      throw Error(ErrorCode::ShapeMismatch, "dropout outside [0, 1)");
    }
    const auto finite = [](double w) { return std::isfinite(w); };
    if (!std::all_of(layer.weights.flat().begin(), layer.weights.flat().end(), finite) ||
        !std::all_of(layer.bias.begin(), layer.bias.end(), finite)) {
      throw Error(ErrorCode::ShapeMismatch, "non-finite parameter in layer " + std::to_string(l));
    }
  }
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning_rate must be > 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorCode::InvalidConfig, "dropout in [0,1)");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be >= 1");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "validation_fraction in [0,1)");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(epsilon > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "Adam hyperparameters out of range");
  }
}

Mlp init_mlp(std::size_t d_in, std::span<const std::size_t> hidden, std::uint64_t seed,
             double dropout) {
  if (d_in == 0 || hidden.empty()) {
    throw Error(ErrorCode::InvalidConfig, "init_mlp needs d_in >= 1 and a hidden layout");
  }
  Rng rng = make_rng(seed, 0x1417);
  Mlp mlp;
  std::size_t fan_in = d_in;
  auto add_layer = [&](std::size_t fan_out, Activation act, double rate) {
    DenseLayer layer;
    layer.weights = Matrix(fan_in, fan_out);
    layer.bias.assign(fan_out, 0.0);
    layer.activation = act;
    layer.dropout = rate;
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : layer.weights.flat()) w = (2.0 * uniform01(rng) - 1.0) * limit;
    mlp.layers.push_back(std::move(layer));
    fan_in = fan_out;
  };
  for (const std::size_t units : hidden) {
    if (units == 0) throw Error(ErrorCode::InvalidConfig, "hidden layer with zero units");
    add_layer(units, Activation::ReLU, dropout);
  }
  add_layer(1, Activation::Sigmoid, 0.0);
  return mlp;
}

ForwardCache forward(const Mlp& mlp, const Matrix& x, Mode mode, Rng* rng) {
  if (mlp.layers.empty() || x.cols() != mlp.in_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "input has " + std::to_string(x.cols()) +
                                                  " columns, network expects " +
                                                  std::to_string(mlp.in_dim()));
  }
  const bool training = mode == Mode::Train;
  ForwardCache cache;
  const std::size_t n_layers = mlp.layers.size();
  cache.inputs.reserve(n_layers);
  cache.pre.resize(n_layers);
  cache.masks.resize(n_layers);
  cache.inputs.push_back(x);

  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = mlp.layers[l];
    kernels::affine(cache.inputs[l], layer.weights, layer.bias, cache.pre[l]);
    if (l + 1 == n_layers) break;

    Matrix act = cache.pre[l];
    for (double& a : act.flat()) a = a > 0.0 ? a : 0.0;
    if (training && layer.dropout > 0.0) {
      if (rng == nullptr) throw Error(ErrorCode::InvalidConfig, "Train mode needs an rng");
      const double keep = 1.0 - layer.dropout;
      const double scale = 1.0 / keep;
      Matrix& mask = cache.masks[l];
      mask.resize(act.rows(), act.cols());
      auto mflat = mask.flat();
      auto aflat = act.flat();
      for (std::size_t k = 0; k < mflat.size(); ++k) {
        mflat[k] = uniform01(*rng) < keep ? scale : 0.0;
        aflat[k] *= mflat[k];
      }
    }
    cache.inputs.push_back(std::move(act));
  }

  const Matrix& logits = cache.pre.back();
  cache.probabilities.resize(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) cache.probabilities[i] = sigmoid(logits(i, 0));
  return cache;
}

double bce_loss(std::span<const double> p, std::span<const int> y) {
  if (p.size() != y.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(p.size()) + " probabilities vs " +
                                               std::to_string(y.size()) + " labels");
  }
  if (p.empty()) throw Error(ErrorCode::EmptyInput, "bce_loss on empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    total -= y[i] != 0 ? std::log(q) : std::log(1.0 - q);
  }
  return total / static_cast<double>(p.size());
}

Gradients backward(const Mlp& mlp, const ForwardCache& cache, std::span<const int> y) {
  const std::size_t n_layers = mlp.layers.size();
  if (cache.inputs.size() != n_layers || cache.pre.size() != n_layers ||
      cache.masks.size() != n_layers || cache.probabilities.size() != y.size()) {
    throw Error(ErrorCode::StaleCache, "forward cache does not match network/batch");
  }
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = mlp.layers[l];
    if (cache.inputs[l].cols() != layer.in_dim() || cache.pre[l].cols() != layer.out_dim() ||
        cache.pre[l].rows() != y.size()) {
      throw Error(ErrorCode::StaleCache, "activation shape mismatch at layer " + std::to_string(l));
    }
  }

  const double inv_batch = 1.0 / static_cast<double>(y.size());
  Matrix delta(y.size(), 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = cache.probabilities[i];
    delta(i, 0) = inside_clamp(p) ? (p - static_cast<double>(y[i])) * inv_batch : 0.0;
  }

  Gradients grads(n_layers);
  for (std::size_t l = n_layers; l-- > 0;) {
    const auto& layer = mlp.layers[l];
    auto& g = grads[l];
    kernels::matmul_at_b(cache.inputs[l], delta, g.weights);
    g.bias.assign(layer.out_dim(), 0.0);
    kernels::column_sums(delta, g.bias);
    if (l == 0) break;

    Matrix upstream;
    kernels::matmul_a_bt(delta, layer.weights, upstream);
    const Matrix& mask = cache.masks[l - 1];
    const Matrix& pre = cache.pre[l - 1];
    auto uflat = upstream.flat();
    const auto pflat = pre.flat();
    for (std::size_t k = 0; k < uflat.size(); ++k) {
      double v = mask.empty() ? uflat[k] : uflat[k] * mask.flat()[k];
      uflat[k] = pflat[k] > 0.0 ? v : 0.0;
    }
    delta = std::move(upstream);
  }
  return grads;
}

AdamState init_adam(const Mlp& mlp) {
  AdamState s;
  for (const auto& layer : mlp.layers) {
    s.m.emplace_back(layer.weights.size(), 0.0);
    s.v.emplace_back(layer.weights.size(), 0.0);
    s.m.emplace_back(layer.bias.size(), 0.0);
    s.v.emplace_back(layer.bias.size(), 0.0);
  }
  return s;
}

void adam_update(std::span<double> params, std::span<const double> grads, std::span<double> m,
                 std::span<double> v, std::uint64_t t, const TrainConfig& config) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch, "adam_update tensor sizes differ");
  }
  if (t == 0) throw Error(ErrorCode::InvalidConfig, "adam_update step counter starts at 1");
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double td = static_cast<double>(t);
  const double correction1 = 1.0 - std::pow(b1, td);
  const double correction2 = 1.0 - std::pow(b2, td);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = grads[k];
    m[k] = b1 * m[k] + (1.0 - b1) * g;
    v[k] = b2 * v[k] + (1.0 - b2) * g * g;
    const double m_hat = m[k] / correction1;
    const double v_hat = v[k] / correction2;
    params[k] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

void adam_step(Mlp& mlp, const Gradients& grads, AdamState& state, const TrainConfig& config) {
  if (grads.size() != mlp.layers.size() || state.m.size() != 2 * mlp.layers.size() ||
      state.v.size() != state.m.size()) {
    throw Error(ErrorCode::ShapeMismatch, "gradient/optimizer state does not match network");
  }
  ++state.t;
  for (std::size_t l = 0; l < mlp.layers.size(); ++l) {
    auto& layer = mlp.layers[l];
    adam_update(layer.weights.flat(), grads[l].weights.flat(), state.m[2 * l], state.v[2 * l],
                state.t, config);
    adam_update(layer.bias, grads[l].bias, state.m[2 * l + 1], state.v[2 * l + 1], state.t,
                config);
  }
}

std::vector<double> predict_proba(const Mlp& mlp, const Matrix& x) {
  return forward(mlp, x, Mode::Infer).probabilities;
}

std::vector<int> predict_labels(std::span<const double> p) {
  std::vector<int> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] > kDecisionThreshold ? 1 : 0;
  return out;
}

TrainResult train(Mlp mlp, const Matrix& x_train, std::span<const int> y_train,
                  const TrainConfig& config, std::optional<ValidationData> validation) {
  config.validate();
  mlp.validate();
  if (x_train.rows() == 0) throw Error(ErrorCode::EmptyTrainingSet, "no training rows");
  if (y_train.size() != x_train.rows()) {
    throw Error(ErrorCode::LengthMismatch, "training labels vs rows");
  }
  if (x_train.cols() != mlp.in_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "training matrix width vs network input");
  }

  std::vector<std::size_t> fit_rows(x_train.rows());
  std::iota(fit_rows.begin(), fit_rows.end(), std::size_t{0});
  Matrix carved_x;
  std::vector<int> carved_y;
  const Matrix* val_x = nullptr;
  std::span<const int> val_y;

  if (validation && validation->x != nullptr) {
    if (validation->x->rows() != validation->y.size() || validation->x->cols() != x_train.cols()) {
      throw Error(ErrorCode::DimensionMismatch, "validation data shape");
    }
    if (validation->x->rows() > 0) {
      val_x = validation->x;
      val_y = validation->y;
    }
  } else if (config.validation_source == ValidationSource::FromTrain &&
             config.validation_fraction > 0.0) {
    Rng split_rng = make_rng(config.seed, 3);
    const auto perm = permutation(x_train.rows(), split_rng);
    const auto n_val = static_cast<std::size_t>(
        std::llround(config.validation_fraction * static_cast<double>(x_train.rows())));
    if (n_val > 0 && n_val < x_train.rows()) {
      const auto cut = perm.end() - static_cast<std::ptrdiff_t>(n_val);
      fit_rows.assign(perm.begin(), cut);
      std::vector<std::size_t> val_rows(cut, perm.end());
      std::sort(fit_rows.begin(), fit_rows.end());
      std::sort(val_rows.begin(), val_rows.end());
      carved_x = select_rows(x_train, val_rows);
      for (const auto r : val_rows) carved_y.push_back(y_train[r]);
      val_x = &carved_x;
      val_y = carved_y;
    }
  }

  const Matrix fit_x = select_rows(x_train, fit_rows);
  std::vector<int> fit_y;
  fit_y.reserve(fit_rows.size());
  for (const auto r : fit_rows) fit_y.push_back(y_train[r]);

  Rng order_rng = make_rng(config.seed, 1);
  Rng dropout_rng = make_rng(config.seed, 2);
  AdamState adam = init_adam(mlp);

  TrainResult result;
  result.history.has_validation = val_x != nullptr;
  result.history.epochs.reserve(config.epochs);

  std::vector<std::size_t> order(fit_x.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<int> batch_y;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), order_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const Matrix batch_x = select_rows(fit_x, idx);
      batch_y.clear();
      for (const auto r : idx) batch_y.push_back(fit_y[r]);
      const ForwardCache cache = forward(mlp, batch_x, Mode::Train, &dropout_rng);
      const Gradients grads = backward(mlp, cache, batch_y);
      adam_step(mlp, grads, adam, config);
    }

    EpochRecord rec;
    const auto p_fit = predict_proba(mlp, fit_x);
    rec.train_loss = bce_loss(p_fit, fit_y);
    rec.train_accuracy = accuracy_of(p_fit, fit_y);
    if (val_x != nullptr) {
      const auto p_val = predict_proba(mlp, *val_x);
      rec.val_loss = bce_loss(p_val, val_y);
      rec.val_accuracy = accuracy_of(p_val, val_y);
    }
    result.history.epochs.push_back(rec);
  }
  result.model = std::move(mlp);
  return result;
}

}  // namespace dtcx::neural
