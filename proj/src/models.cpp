#include "dpsur/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dpsur/kernels.hpp"

namespace dpsur {

namespace {

std::vector<std::uint32_t> identity_batch(std::size_t n) {
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  return idx;
}

void check_example(const ModelShape& shape, const Example& ex) {
  if (static_cast<int>(ex.features.size()) != shape.input_dim)
    throw std::invalid_argument("models: feature dimension mismatch");
  if (shape.kind != ModelKind::linear &&
      (ex.label < 0 || ex.label >= shape.num_classes))
    throw std::invalid_argument("models: label out of range");
}

// logits = W x + b for a row-major (rows x cols) weight block
void affine_forward(const double* w, const double* b, int rows, int cols,
                    std::span<const double> x, double* out) {
  for (int r = 0; r < rows; ++r)
    out[r] = kernels::dot({w + static_cast<std::size_t>(r) * cols,
                           static_cast<std::size_t>(cols)},
                          x) +
             b[r];
}

// stable cross-entropy pieces: returns logsumexp and fills softmax probs
double softmax(std::span<const double> logits, double* probs) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    probs[j] = std::exp(logits[j] - mx);
    sum += probs[j];
  }
  for (std::size_t j = 0; j < logits.size(); ++j) probs[j] /= sum;
  return mx + std::log(sum);
}

struct Mlp1Layout {
  // [W1 (h x d), b1 (h), W2 (k x h), b2 (k)]
  std::size_t w1, b1, w2, b2;
  static Mlp1Layout of(const ModelShape& s) {
    const std::size_t hd = static_cast<std::size_t>(s.hidden_dim) * s.input_dim;
    const std::size_t kh = static_cast<std::size_t>(s.num_classes) * s.hidden_dim;
    return {0, hd, hd + s.hidden_dim, hd + s.hidden_dim + kh};
  }
};

}  // namespace

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "linear") return ModelKind::linear;
  if (name == "logistic") return ModelKind::logistic;
  if (name == "mlp1") return ModelKind::mlp1;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::linear: return "linear";
    case ModelKind::logistic: return "logistic";
    case ModelKind::mlp1: return "mlp1";
  }
  return "?";
}

std::size_t ModelShape::param_count() const {
  switch (kind) {
    case ModelKind::linear:
      return static_cast<std::size_t>(input_dim) + 1;
    case ModelKind::logistic:
      return static_cast<std::size_t>(num_classes) * (input_dim + 1);
    case ModelKind::mlp1:
      return static_cast<std::size_t>(hidden_dim) * (input_dim + 1) +
             static_cast<std::size_t>(num_classes) * (hidden_dim + 1);
  }
  return 0;
}

void ModelShape::validate() const {
  if (input_dim < 1) throw std::invalid_argument("ModelShape: input_dim >= 1");
  if (kind == ModelKind::linear) {
    if (num_classes > 1)
      throw std::invalid_argument("ModelShape: linear model has no classes");
  } else if (num_classes < 2) {
    throw std::invalid_argument("ModelShape: classifier needs >= 2 classes");
  }
  if (kind == ModelKind::mlp1 && hidden_dim < 1)
    throw std::invalid_argument("ModelShape: mlp1 needs hidden_dim >= 1");
}

ModelParams ModelParams::init(const ModelShape& shape, std::uint64_t seed) {
  shape.validate();
  ModelParams p;
  p.shape = shape;
  p.weights.assign(shape.param_count(), 0.0);
  p.momentum.assign(shape.param_count(), 0.0);
  RngStream rng(seed);
  const auto fill = [&](std::size_t offset, std::size_t count, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < count; ++i)
      p.weights[offset + i] = bound * (2.0 * rng.uniform() - 1.0);
  };
  switch (shape.kind) {
    case ModelKind::linear:
    case ModelKind::logistic:
      fill(0, shape.param_count(), shape.input_dim);
      break;
    case ModelKind::mlp1: {
      const auto lay = Mlp1Layout::of(shape);
      fill(lay.w1, lay.w2 - lay.w1, shape.input_dim);
      fill(lay.w2, shape.param_count() - lay.w2, shape.hidden_dim);
      break;
    }
  }
  return p;
}

void ModelParams::validate() const {
  shape.validate();
  if (weights.size() != shape.param_count() ||
      momentum.size() != shape.param_count())
    throw std::invalid_argument("ModelParams: buffer sizes do not match shape");
  for (double w : weights)
    if (!std::isfinite(w))
      throw std::invalid_argument("ModelParams: non-finite weight");
  for (double m : momentum)
    if (!std::isfinite(m))
      throw std::invalid_argument("ModelParams: non-finite momentum entry");
}

namespace {

double sample_loss(const ModelParams& params, const Example& ex,
                   std::vector<double>& scratch) {
  const ModelShape& s = params.shape;
  check_example(s, ex);
  switch (s.kind) {
    case ModelKind::linear: {
      const double pred =
          kernels::dot({params.weights.data(), static_cast<std::size_t>(s.input_dim)},
                       ex.features) +
          params.weights[s.input_dim];
      const double r = pred - ex.target;
      return 0.5 * r * r;
    }
    case ModelKind::logistic: {
      scratch.resize(2 * s.num_classes);
      double* logits = scratch.data();
      double* probs = logits + s.num_classes;
      affine_forward(params.weights.data(),
                     params.weights.data() +
                         static_cast<std::size_t>(s.num_classes) * s.input_dim,
                     s.num_classes, s.input_dim, ex.features, logits);
      const double lse =
          softmax({logits, static_cast<std::size_t>(s.num_classes)}, probs);
      return lse - logits[ex.label];
    }
    case ModelKind::mlp1: {
      const auto lay = Mlp1Layout::of(s);
      scratch.resize(s.hidden_dim + 2 * s.num_classes);
      double* hidden = scratch.data();
      double* logits = hidden + s.hidden_dim;
      double* probs = logits + s.num_classes;
      affine_forward(params.weights.data() + lay.w1,
                     params.weights.data() + lay.b1, s.hidden_dim, s.input_dim,
                     ex.features, hidden);
      for (int i = 0; i < s.hidden_dim; ++i) hidden[i] = std::tanh(hidden[i]);
      affine_forward(params.weights.data() + lay.w2,
                     params.weights.data() + lay.b2, s.num_classes,
                     s.hidden_dim,
                     {hidden, static_cast<std::size_t>(s.hidden_dim)}, logits);
      const double lse =
          softmax({logits, static_cast<std::size_t>(s.num_classes)}, probs);
      return lse - logits[ex.label];
    }
  }
  return 0.0;
}

void sample_gradient(const ModelParams& params, const Example& ex,
                     std::vector<double>& grad, std::vector<double>& scratch) {
  const ModelShape& s = params.shape;
  check_example(s, ex);
  grad.assign(s.param_count(), 0.0);
  switch (s.kind) {
    case ModelKind::linear: {
      const double pred =
          kernels::dot({params.weights.data(), static_cast<std::size_t>(s.input_dim)},
                       ex.features) +
          params.weights[s.input_dim];
      const double r = pred - ex.target;
      kernels::axpy(r, ex.features,
                    {grad.data(), static_cast<std::size_t>(s.input_dim)});
      grad[s.input_dim] = r;
      break;
    }
    case ModelKind::logistic: {
      scratch.resize(2 * s.num_classes);
      double* logits = scratch.data();
      double* probs = logits + s.num_classes;
      affine_forward(params.weights.data(),
                     params.weights.data() +
                         static_cast<std::size_t>(s.num_classes) * s.input_dim,
                     s.num_classes, s.input_dim, ex.features, logits);
      softmax({logits, static_cast<std::size_t>(s.num_classes)}, probs);
      for (int j = 0; j < s.num_classes; ++j) {
        const double delta = probs[j] - (j == ex.label ? 1.0 : 0.0);
        kernels::axpy(delta, ex.features,
                      {grad.data() + static_cast<std::size_t>(j) * s.input_dim,
                       static_cast<std::size_t>(s.input_dim)});
        grad[static_cast<std::size_t>(s.num_classes) * s.input_dim + j] = delta;
      }
      break;
    }
    case ModelKind::mlp1: {
      const auto lay = Mlp1Layout::of(s);
      scratch.resize(2 * s.hidden_dim + 2 * s.num_classes);
      double* hidden = scratch.data();
      double* dhidden = hidden + s.hidden_dim;
      double* logits = dhidden + s.hidden_dim;
      double* probs = logits + s.num_classes;
      affine_forward(params.weights.data() + lay.w1,
                     params.weights.data() + lay.b1, s.hidden_dim, s.input_dim,
                     ex.features, hidden);
      for (int i = 0; i < s.hidden_dim; ++i) hidden[i] = std::tanh(hidden[i]);
      affine_forward(params.weights.data() + lay.w2,
                     params.weights.data() + lay.b2, s.num_classes,
                     s.hidden_dim,
                     {hidden, static_cast<std::size_t>(s.hidden_dim)}, logits);
      softmax({logits, static_cast<std::size_t>(s.num_classes)}, probs);
      std::fill(dhidden, dhidden + s.hidden_dim, 0.0);
      for (int j = 0; j < s.num_classes; ++j) {
        const double delta = probs[j] - (j == ex.label ? 1.0 : 0.0);
        kernels::axpy(delta,
                      {hidden, static_cast<std::size_t>(s.hidden_dim)},
                      {grad.data() + lay.w2 +
                           static_cast<std::size_t>(j) * s.hidden_dim,
                       static_cast<std::size_t>(s.hidden_dim)});
        grad[lay.b2 + j] = delta;
        kernels::axpy(delta,
                      {params.weights.data() + lay.w2 +
                           static_cast<std::size_t>(j) * s.hidden_dim,
                       static_cast<std::size_t>(s.hidden_dim)},
                      {dhidden, static_cast<std::size_t>(s.hidden_dim)});
      }
      for (int i = 0; i < s.hidden_dim; ++i) {
        const double di = dhidden[i] * (1.0 - hidden[i] * hidden[i]);
        kernels::axpy(di, ex.features,
                      {grad.data() + lay.w1 +
                           static_cast<std::size_t>(i) * s.input_dim,
                       static_cast<std::size_t>(s.input_dim)});
        grad[lay.b1 + i] = di;
      }
      break;
    }
  }
}

}  // namespace

double loss(const ModelParams& params, std::span<const Example> pool,
            std::span<const std::uint32_t> batch) {
  params.validate();
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  std::vector<double> scratch;
  double total = 0.0;
  for (std::uint32_t i : batch) {
    if (i >= pool.size()) throw std::invalid_argument("loss: index out of range");
    total += sample_loss(params, pool[i], scratch);
  }
  return total / static_cast<double>(batch.size());
}

double loss(const ModelParams& params, std::span<const Example> batch) {
  const auto idx = identity_batch(batch.size());
  return loss(params, batch, idx);
}

GradientBatch per_sample_gradients(const ModelParams& params,
                                   std::span<const Example> pool,
                                   std::span<const std::uint32_t> batch) {
  params.validate();
  GradientBatch out;
  out.per_sample.resize(batch.size());
  std::vector<double> scratch;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    if (batch[b] >= pool.size())
      throw std::invalid_argument("per_sample_gradients: index out of range");
    sample_gradient(params, pool[batch[b]], out.per_sample[b], scratch);
  }
  return out;
}

GradientBatch per_sample_gradients(const ModelParams& params,
                                   std::span<const Example> batch) {
  const auto idx = identity_batch(batch.size());
  return per_sample_gradients(params, batch, idx);
}

void clip_per_sample(GradientBatch& grads, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("clip_per_sample: C must be > 0");
  for (auto& g : grads.per_sample) {
    const double sq = kernels::squared_norm(g);
    if (!std::isfinite(sq))
      throw std::invalid_argument("clip_per_sample: non-finite gradient");
    const double norm = std::sqrt(sq);
    if (norm > c) kernels::scale(g, c / norm);
  }
  grads.clip_bound = c;
  grads.clipped = true;
}

std::optional<std::vector<double>> noisy_mean_gradient(
    const GradientBatch& grads, double sigma, RngStream& rng) {
  if (!grads.clipped)
    throw std::invalid_argument("noisy_mean_gradient: batch must be clipped");
  if (!(sigma >= 0.0))
    throw std::invalid_argument("noisy_mean_gradient: sigma must be >= 0");
  if (grads.per_sample.empty()) return std::nullopt;
  const std::size_t dim = grads.per_sample.front().size();
  std::vector<double> mean(dim, 0.0);
  for (const auto& g : grads.per_sample) {
    if (g.size() != dim)
      throw std::invalid_argument("noisy_mean_gradient: ragged batch");
    kernels::axpy(1.0, g, mean);
  }
  const double noise_sd = sigma * grads.clip_bound;
  for (std::size_t i = 0; i < dim; ++i) mean[i] += noise_sd * rng.gaussian();
  kernels::scale(mean, 1.0 / static_cast<double>(grads.per_sample.size()));
  return mean;
}

int predict_class(const ModelParams& params, const Example& ex) {
  const ModelShape& s = params.shape;
  if (s.kind == ModelKind::linear)
    throw std::invalid_argument("predict_class: linear model has no classes");
  check_example(s, ex);
  std::vector<double> scratch;
  std::vector<double> logits(s.num_classes);
  if (s.kind == ModelKind::logistic) {
    affine_forward(params.weights.data(),
                   params.weights.data() +
                       static_cast<std::size_t>(s.num_classes) * s.input_dim,
                   s.num_classes, s.input_dim, ex.features, logits.data());
  } else {
    const auto lay = Mlp1Layout::of(s);
    std::vector<double> hidden(s.hidden_dim);
    affine_forward(params.weights.data() + lay.w1,
                   params.weights.data() + lay.b1, s.hidden_dim, s.input_dim,
                   ex.features, hidden.data());
    for (int i = 0; i < s.hidden_dim; ++i) hidden[i] = std::tanh(hidden[i]);
    affine_forward(params.weights.data() + lay.w2,
                   params.weights.data() + lay.b2, s.num_classes, s.hidden_dim,
                   hidden, logits.data());
  }
  return static_cast<int>(
      std::max_element(logits.begin(), logits.end()) - logits.begin());
}

double predict_value(const ModelParams& params, const Example& ex) {
  const ModelShape& s = params.shape;
  if (s.kind != ModelKind::linear)
    throw std::invalid_argument("predict_value: only for linear regression");
  check_example(s, ex);
  return kernels::dot({params.weights.data(),
                       static_cast<std::size_t>(s.input_dim)},
                      ex.features) +
         params.weights[s.input_dim];
}

ModelParams sgd_momentum_step(const ModelParams& params,
                              std::span<const double> grad, double eta,
                              double momentum_coeff) {
  if (grad.size() != params.weights.size())
    throw std::invalid_argument("sgd_momentum_step: gradient size mismatch");
  if (!(eta > 0.0) || !(momentum_coeff >= 0.0) || momentum_coeff >= 1.0)
    throw std::invalid_argument(
        "sgd_momentum_step: need eta > 0 and momentum in [0, 1)");
  ModelParams next = params;
  kernels::scale(next.momentum, momentum_coeff);
  kernels::axpy(1.0, grad, next.momentum);
  kernels::axpy(-eta, next.momentum, next.weights);
  return next;
}

}  // namespace dpsur
