#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpsur/rng.hpp"

namespace dpsur {

enum class ModelKind { linear, logistic, mlp1 };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

struct ModelShape {
  ModelKind kind = ModelKind::logistic;
  int input_dim = 0;
  int num_classes = 0;  // 1 for linear regression
  int hidden_dim = 0;   // mlp1 only

  std::size_t param_count() const;
  void validate() const;
};

// Flat parameter vector plus the SGD momentum buffer. Candidate steps
// return a new value; rejecting a candidate is just dropping it, which
// restores the previous weights and momentum bit-for-bit.
struct ModelParams {
  ModelShape shape;
  std::vector<double> weights;
  std::vector<double> momentum;

  // Seeded uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] per layer.
  static ModelParams init(const ModelShape& shape, std::uint64_t seed);
  void validate() const;
};

struct Example {
  std::vector<double> features;
  int label = 0;       // classification
  double target = 0.0; // regression
};

// Per-sample flat gradients for one sampled batch.
struct GradientBatch {
  std::vector<std::vector<double>> per_sample;
  double clip_bound = 0.0;
  bool clipped = false;
};

// Mean per-sample loss: 0.5 squared error for linear regression,
// softmax cross-entropy (nats) otherwise.
double loss(const ModelParams& params, std::span<const Example> pool,
            std::span<const std::uint32_t> batch);
double loss(const ModelParams& params, std::span<const Example> batch);

GradientBatch per_sample_gradients(const ModelParams& params,
                                   std::span<const Example> pool,
                                   std::span<const std::uint32_t> batch);
GradientBatch per_sample_gradients(const ModelParams& params,
                                   std::span<const Example> batch);

// Scales each per-sample gradient by 1/max(1, ||g||_2 / c); vectors already
// inside the ball are left untouched.
void clip_per_sample(GradientBatch& grads, double c);

// (sum of clipped gradients + N(0, sigma^2 C^2 I)) / realized batch size.
// An empty batch yields nullopt: the caller skips the step.
std::optional<std::vector<double>> noisy_mean_gradient(
    const GradientBatch& grads, double sigma, RngStream& rng);

// buffer <- momentum_coeff * buffer + grad; weights <- weights - eta * buffer.
// Pure: the input params are not modified.
ModelParams sgd_momentum_step(const ModelParams& params,
                              std::span<const double> grad, double eta,
                              double momentum_coeff);

// argmax class score (classifiers only)
int predict_class(const ModelParams& params, const Example& ex);
// regression prediction (linear only)
double predict_value(const ModelParams& params, const Example& ex);

}  // namespace dpsur
