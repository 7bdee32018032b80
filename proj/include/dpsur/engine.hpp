#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpsur/accountant.hpp"
#include "dpsur/data.hpp"
#include "dpsur/mechanisms.hpp"
#include "dpsur/models.hpp"

namespace dpsur {

enum class Algorithm { dpsur, dpsgd };

Algorithm algorithm_from_string(const std::string& name);
std::string to_string(Algorithm a);

struct TrainConfig {
  Algorithm algorithm = Algorithm::dpsur;
  ModelShape model;

  double eta = 0.5;
  double momentum = 0.9;
  double batch_train = 256;  // expected Poisson batch size B_t
  double batch_valid = 256;  // expected Poisson batch size B_v
  double clip_train = 1.0;   // C_t
  double clip_valid = 1e-3;  // C_v
  double sigma_train = 1.0;  // sigma_t; 0 disables accounting (non-private)
  double sigma_valid = 1.0;  // sigma_v; 0 disables accounting (non-private)
  double beta = -1.0;        // acceptance threshold Z = beta * C_v
  LossClipMode loss_clip = LossClipMode::sign_discretize;

  double target_epsilon = 3.0;
  double delta = 1e-5;
  long max_accepted_updates = 1000;   // T
  long max_iterations = 1'000'000;    // hard cap over accept+reject+skip
  std::uint64_t seed = 0;

  // When false the ledger charges only training releases; used to realize
  // the accept-everything mode that coincides with dpsgd.
  bool charge_validation = true;
  // Evaluate on the test set every this many accepted updates (0 = never).
  long eval_every = 0;

  // Returns every problem found (empty = valid).
  std::vector<std::string> validate(std::size_t dataset_size) const;

  bool privacy_enabled() const {
    return sigma_train > 0.0 &&
           (algorithm == Algorithm::dpsgd || !charge_validation ||
            sigma_valid > 0.0);
  }
};

struct TraceEvent {
  enum class Kind { accepted, rejected, skipped };
  Kind kind;
  long iteration = 0;       // 1-based loop iteration
  long accepted_count = 0;  // t after this event
  std::size_t train_batch_size = 0;
  std::size_t valid_batch_size = 0;
  double candidate_loss = 0.0;  // J(w_new) on the validation batch
  double baseline_loss = 0.0;   // J(w_{t-1}) on the same batch (NaN for dpsgd)
  double epsilon = 0.0;         // cumulative (inf when not accounted)
  double test_metric = 0.0;     // NaN unless evaluated at this event
  double wall_ms = 0.0;
};

std::string to_string(TraceEvent::Kind k);

struct TrainTrace {
  std::vector<TraceEvent> events;
  long accepted = 0;
  long rejected = 0;
  long skipped = 0;
  long iterations = 0;
  double final_epsilon = 0.0;
  int final_best_alpha = 0;
  double delta = 0.0;
};

// Saved positions of the four per-purpose random streams plus the init
// stream, for checkpointing.
struct RngStates {
  std::string init;
  std::string train_sample;
  std::string grad_noise;
  std::string valid_sample;
  std::string valid_noise;
};

struct TrainResult {
  ModelParams params;
  TrainTrace trace;
  PrivacyLedger ledger;  // accepted_updates reflects the final t
  RngStates rng_states;
};

// Independent Bernoulli(rate) inclusion per index.
std::vector<std::uint32_t> poisson_sample(std::size_t n, double rate,
                                          RngStream& rng);

TrainResult dpsur_train(const Dataset& train, const Dataset& test,
                        const TrainConfig& config);
TrainResult dpsgd_train(const Dataset& train, const Dataset& test,
                        const TrainConfig& config);

// Classification: argmax accuracy in [0,1]. Regression: mean loss.
double evaluate(const ModelParams& params, const Dataset& data);

}  // namespace dpsur
