#include "dpsur/engine.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dpsur {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// stream tags derived from the master seed; acceptance or rejection of a
// candidate must never shift the randomness of later sampling
enum StreamTag : std::uint64_t {
  kInitStream = 0,
  kTrainSampleStream = 1,
  kGradNoiseStream = 2,
  kValidSampleStream = 3,
  kValidNoiseStream = 4,
};

struct Clock {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - start)
        .count();
  }
};

void check_model_matches_data(const ModelShape& model, const Dataset& data) {
  if (model.input_dim != data.feature_dim)
    throw std::invalid_argument(
        "engine: model input dim " + std::to_string(model.input_dim) +
        " != dataset feature dim " + std::to_string(data.feature_dim));
  const bool model_regression = model.kind == ModelKind::linear;
  if (model_regression != data.regression)
    throw std::invalid_argument(
        "engine: regression model/dataset mismatch");
  if (!model_regression && model.num_classes != data.num_classes)
    throw std::invalid_argument(
        "engine: model classes " + std::to_string(model.num_classes) +
        " != dataset classes " + std::to_string(data.num_classes));
}

}  // namespace

Algorithm algorithm_from_string(const std::string& name) {
  if (name == "dpsur") return Algorithm::dpsur;
  if (name == "dpsgd") return Algorithm::dpsgd;
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

std::string to_string(Algorithm a) {
  return a == Algorithm::dpsur ? "dpsur" : "dpsgd";
}

std::string to_string(TraceEvent::Kind k) {
  switch (k) {
    case TraceEvent::Kind::accepted: return "accepted";
    case TraceEvent::Kind::rejected: return "rejected";
    case TraceEvent::Kind::skipped: return "skipped";
  }
  return "?";
}

std::vector<std::string> TrainConfig::validate(std::size_t dataset_size) const {
  std::vector<std::string> errs;
  try {
    model.validate();
  } catch (const std::exception& e) {
    errs.push_back(e.what());
  }
  if (!(eta > 0.0)) errs.push_back("eta must be > 0");
  if (!(momentum >= 0.0) || momentum >= 1.0)
    errs.push_back("momentum must be in [0, 1)");
  if (!(batch_train >= 1.0))
    errs.push_back("batch_train must be >= 1");
  if (dataset_size > 0 && batch_train > static_cast<double>(dataset_size))
    errs.push_back("batch_train exceeds dataset size");
  if (algorithm == Algorithm::dpsur) {
    if (!(batch_valid >= 1.0)) errs.push_back("batch_valid must be >= 1");
    if (dataset_size > 0 && batch_valid > static_cast<double>(dataset_size))
      errs.push_back("batch_valid exceeds dataset size");
  }
  if (!(clip_train > 0.0)) errs.push_back("clip_train must be > 0");
  if (!(clip_valid > 0.0)) errs.push_back("clip_valid must be > 0");
  if (!(sigma_train >= 0.0)) errs.push_back("sigma_train must be >= 0");
  if (!(sigma_valid >= 0.0)) errs.push_back("sigma_valid must be >= 0");
  if (beta != beta) errs.push_back("beta must not be NaN");
  if (privacy_enabled()) {
    if (!(target_epsilon > 0.0)) errs.push_back("target_epsilon must be > 0");
    if (!(delta > 0.0 && delta < 1.0)) errs.push_back("delta must be in (0, 1)");
  }
  if (max_accepted_updates < 1) errs.push_back("max_accepted_updates must be >= 1");
  if (max_iterations < 1) errs.push_back("max_iterations must be >= 1");
  if (eval_every < 0) errs.push_back("eval_every must be >= 0");
  return errs;
}

std::vector<std::uint32_t> poisson_sample(std::size_t n, double rate,
                                          RngStream& rng) {
  if (!(rate > 0.0) || rate > 1.0)
    throw std::invalid_argument("poisson_sample: rate must be in (0, 1]");
  std::vector<std::uint32_t> idx;
  if (rate == 1.0) {
    idx.resize(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    return idx;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (rng.uniform() < rate) idx.push_back(static_cast<std::uint32_t>(i));
  return idx;
}

double evaluate(const ModelParams& params, const Dataset& data) {
  if (data.examples.empty())
    throw std::invalid_argument("evaluate: empty dataset");
  if (data.regression) return loss(params, data.examples);
  long hits = 0;
  for (const auto& ex : data.examples)
    if (predict_class(params, ex) == ex.label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

namespace {

TrainResult run_training(const Dataset& train, const Dataset& test,
                         const TrainConfig& config) {
  const auto errs = config.validate(train.size());
  if (!errs.empty()) {
    std::string msg = "invalid training config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  train.validate();
  check_model_matches_data(config.model, train);
  if (!test.examples.empty()) check_model_matches_data(config.model, test);

  const bool selective = config.algorithm == Algorithm::dpsur;
  const std::size_t n = train.size();
  const double q_train = config.batch_train / static_cast<double>(n);
  const double q_valid = config.batch_valid / static_cast<double>(n);

  const bool accounted = config.privacy_enabled();
  PrivacyLedger ledger;
  ledger.train_spec = {q_train, config.sigma_train};
  if (selective && config.charge_validation)
    ledger.valid_spec = SubsampledGaussianSpec{q_valid, config.sigma_valid};
  ledger.delta = config.delta;
  long budget_cap = config.max_accepted_updates;
  if (accounted) {
    const long t_max = calibrate_max_updates(
        ledger.train_spec, ledger.valid_spec, config.target_epsilon,
        config.delta);
    if (t_max == 0)
      throw InfeasibleBudget(
          "privacy budget does not cover a single update (epsilon " +
          std::to_string(config.target_epsilon) + ")");
    budget_cap = std::min(budget_cap, t_max);
  }

  RngStream init_rng = RngStream::derive(config.seed, kInitStream);
  RngStream train_sample = RngStream::derive(config.seed, kTrainSampleStream);
  RngStream grad_noise = RngStream::derive(config.seed, kGradNoiseStream);
  RngStream valid_sample = RngStream::derive(config.seed, kValidSampleStream);
  RngStream valid_noise = RngStream::derive(config.seed, kValidNoiseStream);

  ModelParams params = ModelParams::init(config.model, init_rng.next_u64());

  const ValidationMechanismSpec test_spec{config.clip_valid,
                                          config.sigma_valid, config.beta,
                                          config.loss_clip};

  TrainResult result;
  TrainTrace& trace = result.trace;
  trace.delta = config.delta;
  Clock clock;

  const auto current_epsilon = [&](long t) {
    if (!accounted) return kInf;
    ledger.accepted_updates = t;
    const DpBound bound = ledger_epsilon(ledger);
    trace.final_best_alpha = bound.best_alpha;
    return bound.epsilon;
  };

  // Before the first accepted update the ledger holds the zero curve; its
  // conversion floor is the reported epsilon at t = 0.
  double epsilon = current_epsilon(0);

  long t = 0;
  for (long iter = 1;
     t < budget_cap && iter <= config.max_iterations; ++iter) {
    ++trace.iterations;
    TraceEvent ev{};
    ev.iteration = iter;
    ev.test_metric = kNaN;
    ev.candidate_loss = kNaN;
    ev.baseline_loss = kNaN;

    const auto batch = poisson_sample(n, q_train, train_sample);
    ev.train_batch_size = batch.size();
    if (batch.empty()) {
      ++trace.skipped;
      ev.kind = TraceEvent::Kind::skipped;
      ev.accepted_count = t;
      ev.epsilon = epsilon;
      ev.wall_ms = clock.ms();
      trace.events.push_back(ev);
      continue;
    }

    GradientBatch grads = per_sample_gradients(params, train.examples, batch);
    clip_per_sample(grads, config.clip_train);
    const auto noisy = noisy_mean_gradient(grads, config.sigma_train, grad_noise);
    ModelParams candidate =
        sgd_momentum_step(params, *noisy, config.eta, config.momentum);

    bool accepted = true;
    double candidate_loss = kNaN;
    std::size_t valid_size = 0;
    if (selective) {
      const auto vbatch = poisson_sample(n, q_valid, valid_sample);
      valid_size = vbatch.size();
      if (vbatch.empty()) {
        ++trace.skipped;
        ev.kind = TraceEvent::Kind::skipped;
        ev.accepted_count = t;
        ev.valid_batch_size = 0;
        ev.epsilon = epsilon;
        ev.wall_ms = clock.ms();
        trace.events.push_back(ev);
        continue;
      }
      const double j_new = loss(candidate, train.examples, vbatch);
      const double j_old = loss(params, train.examples, vbatch);
      if (!std::isfinite(j_new) || !std::isfinite(j_old))
        throw std::runtime_error(
            "training diverged: non-finite loss at iteration " +
            std::to_string(iter));
      candidate_loss = j_new;
      ev.baseline_loss = j_old;
      accepted = noisy_threshold_test(j_new - j_old, test_spec, valid_noise)
                     .accepted;
    } else {
      candidate_loss = loss(candidate, train.examples, batch);
      if (!std::isfinite(candidate_loss))
        throw std::runtime_error(
            "training diverged: non-finite loss at iteration " +
            std::to_string(iter));
    }

    ev.valid_batch_size = valid_size;
    ev.candidate_loss = candidate_loss;
    if (accepted) {
      params = std::move(candidate);
      ++t;
      epsilon = current_epsilon(t);
      ++trace.accepted;
      ev.kind = TraceEvent::Kind::accepted;
      if (config.eval_every > 0 && t % config.eval_every == 0 &&
          !test.examples.empty())
        ev.test_metric = evaluate(params, test);
    } else {
      ++trace.rejected;
      ev.kind = TraceEvent::Kind::rejected;
    }
    ev.accepted_count = t;
    ev.epsilon = epsilon;
    ev.wall_ms = clock.ms();
    trace.events.push_back(ev);
  }

  trace.final_epsilon = epsilon;
  ledger.accepted_updates = t;
  result.ledger = ledger;
  result.rng_states = {init_rng.save_state(), train_sample.save_state(),
                       grad_noise.save_state(), valid_sample.save_state(),
                       valid_noise.save_state()};
  result.params = std::move(params);
  return result;
}

}  // namespace

TrainResult dpsur_train(const Dataset& train, const Dataset& test,
                        const TrainConfig& config) {
  TrainConfig c = config;
  c.algorithm = Algorithm::dpsur;
  return run_training(train, test, c);
}

TrainResult dpsgd_train(const Dataset& train, const Dataset& test,
                        const TrainConfig& config) {
  TrainConfig c = config;
  c.algorithm = Algorithm::dpsgd;
  return run_training(train, test, c);
}

}  // namespace dpsur
