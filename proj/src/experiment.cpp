#include "dpsur/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dpsur/checkpoint.hpp"
#include "json.hpp"

namespace dpsur {

namespace {

using nlohmann::json;

// non-finite values have no JSON representation; the schema documents null
// as "value does not exist for this event"
json number_or_null(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

ResolvedData resolve_data(const DataConfig& config) {
  ResolvedData out;
  switch (config.source) {
    case DataSource::blobs: {
      auto gen = generate_synthetic(SyntheticKind::gaussian_blobs, config.n,
                                    config.dim, config.classes, config.noise,
                                    config.generator_seed, config.separation);
      out.train = std::move(gen.train);
      out.test = std::move(gen.test);
      break;
    }
    case DataSource::linear: {
      auto gen = generate_synthetic(SyntheticKind::linear_regression, config.n,
                                    config.dim, 0, config.noise,
                                    config.generator_seed);
      out.train = std::move(gen.train);
      out.test = std::move(gen.test);
      break;
    }
    case DataSource::csv: {
      CsvSchema schema{config.label_column, {}, config.regression, 0};
      NormalizationStats stats;
      out.train = load_csv(config.csv_train, schema, config.normalization,
                           &stats);
      if (!config.csv_test.empty()) {
        schema.num_classes = out.train.num_classes;
        out.test = load_csv(config.csv_test, schema, config.normalization,
                            nullptr, &stats);
      }
      break;
    }
  }
  return out;
}

std::string trace_event_json(const TraceEvent& ev) {
  json j;
  j["event"] = to_string(ev.kind);
  j["iteration"] = ev.iteration;
  j["t"] = ev.accepted_count;
  j["train_batch"] = ev.train_batch_size;
  j["valid_batch"] = ev.valid_batch_size;
  j["loss"] = number_or_null(ev.candidate_loss);
  j["baseline_loss"] = number_or_null(ev.baseline_loss);
  j["epsilon"] = number_or_null(ev.epsilon);
  j["test_metric"] = number_or_null(ev.test_metric);
  j["wall_ms"] = ev.wall_ms;
  return j.dump();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  if (!config.seed_set)
    throw ConfigError({"run.seed is required for training runs"});
  ResolvedData data = resolve_data(config.data);

  TrainConfig train_cfg = config.train;
  train_cfg.algorithm = config.algorithm;
  train_cfg.seed = config.seed;
  train_cfg.model = config.resolve_model_shape(data.train);
  {
    const auto problems = train_cfg.validate(data.train.size());
    if (!problems.empty()) throw ConfigError(problems);
  }

  const std::filesystem::path run_dir(config.output_dir);
  std::filesystem::create_directories(run_dir);

  const TrainResult result = config.algorithm == Algorithm::dpsur
                                 ? dpsur_train(data.train, data.test, train_cfg)
                                 : dpsgd_train(data.train, data.test, train_cfg);

  // trace.jsonl: one record per loop event, append-friendly
  {
    std::ofstream trace(run_dir / "trace.jsonl");
    if (!trace) throw std::runtime_error("cannot write trace.jsonl");
    for (const auto& ev : result.trace.events)
      trace << trace_event_json(ev) << "\n";
  }

  // trajectory.csv: one row per accepted update
  {
    std::ofstream csv(run_dir / "trajectory.csv");
    if (!csv) throw std::runtime_error("cannot write trajectory.csv");
    csv.precision(17);
    csv << "accepted_update_index,train_loss,test_metric,epsilon\n";
    for (const auto& ev : result.trace.events) {
      if (ev.kind != TraceEvent::Kind::accepted) continue;
      csv << ev.accepted_count << "," << ev.candidate_loss << ",";
      if (!std::isnan(ev.test_metric)) csv << ev.test_metric;
      csv << "," << ev.epsilon << "\n";
    }
  }

  ExperimentResult out;
  out.config = config;
  out.run_dir = run_dir.string();
  out.accepted = result.trace.accepted;
  out.rejected = result.trace.rejected;
  out.skipped = result.trace.skipped;
  out.iterations = result.trace.iterations;
  out.epsilon = result.trace.final_epsilon;
  out.delta = result.trace.delta;
  out.best_alpha = result.trace.final_best_alpha;
  out.final_train_loss = loss(result.params, data.train.examples);
  out.final_test_metric =
      data.test.examples.empty() ? std::nan("") : evaluate(result.params, data.test);

  // result.json: config snapshot + final metrics
  {
    json j;
    j["config"] = config.serialize();
    j["algorithm"] = to_string(config.algorithm);
    j["counts"] = {{"accepted", out.accepted},
                   {"rejected", out.rejected},
                   {"skipped", out.skipped},
                   {"iterations", out.iterations}};
    j["final"] = {{"epsilon", number_or_null(out.epsilon)},
                  {"delta", out.delta},
                  {"best_alpha", out.best_alpha},
                  {"train_loss", out.final_train_loss},
                  {"test_metric", number_or_null(out.final_test_metric)}};
    j["outputs"] = {{"trace", "trace.jsonl"},
                    {"trajectory", "trajectory.csv"},
                    {"checkpoint", "checkpoint.bin"}};
    write_text(run_dir / "result.json", j.dump(2) + "\n");
  }

  save_checkpoint({result.params, result.ledger, result.rng_states},
                  (run_dir / "checkpoint.bin").string());
  return out;
}

}  // namespace dpsur
