#pragma once

#include <string>

#include "dpsur/config.hpp"
#include "dpsur/engine.hpp"

namespace dpsur {

struct ExperimentResult {
  ExperimentConfig config;        // effective config (defaults applied)
  double final_train_loss = 0.0;  // mean loss on the full training set
  double final_test_metric = 0.0; // accuracy (classification) or mean loss
  long accepted = 0;
  long rejected = 0;
  long skipped = 0;
  long iterations = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  int best_alpha = 0;
  std::string run_dir;
};

// Materializes the datasets described by the config (synthetic generation
// or CSV load; CSV normalization constants are fitted on the training file
// and re-applied to the test file).
struct ResolvedData {
  Dataset train;
  Dataset test;
};
ResolvedData resolve_data(const DataConfig& config);

// Runs the configured experiment and writes trace.jsonl, trajectory.csv,
// result.json and checkpoint.bin into the run directory.
ExperimentResult run_experiment(const ExperimentConfig& config);

// One trace event as a JSON line (the schema shipped in docs/).
std::string trace_event_json(const TraceEvent& ev);

}  // namespace dpsur
