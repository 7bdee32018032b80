#pragma once

#include <map>
#include <string>
#include <vector>

#include "dpsur/data.hpp"
#include "dpsur/engine.hpp"

namespace dpsur {

// Reported by the config parser; carries every problem found, not just the
// first. CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::vector<std::string>& problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class DataSource { blobs, linear, csv };

struct DataConfig {
  DataSource source = DataSource::blobs;
  std::size_t n = 12500;  // generated points before the 80/20 split
  int dim = 20;
  int classes = 5;
  double noise = 1.0;
  double separation = 0.0;  // 0: use 10 * noise
  std::uint64_t generator_seed = 1;
  std::string csv_train;
  std::string csv_test;
  std::string label_column = "label";
  bool regression = false;
  Normalization normalization = Normalization::none;
};

// Noise multipliers for the validation test, keyed by named preset and
// integer privacy budget (1..4). Chosen presets also default the validation
// batch size (256; the imdb preset uses 128).
struct SigmaValidPreset {
  std::string name;                 // "none" or a preset name
  double sigma_valid(int epsilon) const;
  double default_batch_valid() const;
  static const std::vector<std::string>& names();
};

// Full experiment description: run identity, model, data, and the training
// hyperparameters. Keys explicitly present in the file win over preset
// values; preset values win over built-in defaults.
struct ExperimentConfig {
  // [run]
  Algorithm algorithm = Algorithm::dpsur;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string output_dir = "runs/out";
  // [model]
  ModelKind model_kind = ModelKind::logistic;
  int hidden_dim = 16;
  // [data]
  DataConfig data;
  // [train]
  TrainConfig train;  // model shape filled in after data resolution
  std::string preset = "none";

  // Renders every effective key; parsing the result reproduces this config
  // exactly (doubles are round-tripped at full precision).
  std::string serialize() const;

  // Builds the TrainConfig model shape from the resolved dataset.
  ModelShape resolve_model_shape(const Dataset& train_data) const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);
ExperimentConfig default_config();

}  // namespace dpsur
