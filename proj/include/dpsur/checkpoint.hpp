#pragma once

#include <string>

#include "dpsur/engine.hpp"

namespace dpsur {

// Binary checkpoint: versioned header, model shape, weights, momentum,
// ledger, and the five RNG stream states. Little-endian doubles, length-
// prefixed strings.
struct Checkpoint {
  ModelParams params;
  PrivacyLedger ledger;
  RngStates rng_states;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dpsur
