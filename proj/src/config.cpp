#include "dpsur/config.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace dpsur {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  std::string msg = "configuration errors:";
  for (const auto& p : problems) msg += "\n  " + p;
  return msg;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// sigma_v by preset row and integer epsilon column (1..4)
struct PresetRow {
  const char* name;
  double sigma[4];
  double batch_valid;
};
constexpr PresetRow kPresets[] = {
    {"mnist", {1.3, 1.0, 0.9, 0.8}, 256},
    {"fmnist", {1.3, 1.3, 0.8, 0.8}, 256},
    {"cifar10", {1.3, 1.3, 1.1, 1.1}, 256},
    {"imdb", {1.3, 1.2, 1.0, 0.9}, 128},
};

const PresetRow* find_preset(const std::string& name) {
  for (const auto& row : kPresets)
    if (name == row.name) return &row;
  return nullptr;
}

}  // namespace

ConfigError::ConfigError(const std::vector<std::string>& problems)
    : std::runtime_error(join_problems(problems)), problems_(problems) {}

const std::vector<std::string>& SigmaValidPreset::names() {
  static const std::vector<std::string> names = {"none", "mnist", "fmnist",
                                                 "cifar10", "imdb"};
  return names;
}

double SigmaValidPreset::sigma_valid(int epsilon) const {
  const PresetRow* row = find_preset(name);
  if (!row) throw std::invalid_argument("unknown preset '" + name + "'");
  if (epsilon < 1 || epsilon > 4)
    throw std::invalid_argument(
        "preset '" + name + "' defines sigma_valid only for epsilon 1..4");
  return row->sigma[epsilon - 1];
}

double SigmaValidPreset::default_batch_valid() const {
  const PresetRow* row = find_preset(name);
  if (!row) throw std::invalid_argument("unknown preset '" + name + "'");
  return row->batch_valid;
}

ModelShape ExperimentConfig::resolve_model_shape(
    const Dataset& train_data) const {
  ModelShape shape;
  shape.kind = model_kind;
  shape.input_dim = train_data.feature_dim;
  shape.num_classes = model_kind == ModelKind::linear ? 1
                                                      : train_data.num_classes;
  shape.hidden_dim = model_kind == ModelKind::mlp1 ? hidden_dim : 0;
  return shape;
}

std::string ExperimentConfig::serialize() const {
  std::ostringstream out;
  out << "[run]\n";
  out << "algorithm = " << to_string(algorithm) << "\n";
  out << "seed = " << seed << "\n";
  out << "output_dir = " << output_dir << "\n";
  out << "\n[model]\n";
  out << "kind = " << to_string(model_kind) << "\n";
  out << "hidden_dim = " << hidden_dim << "\n";
  out << "\n[data]\n";
  out << "source = "
      << (data.source == DataSource::blobs
              ? "blobs"
              : data.source == DataSource::linear ? "linear" : "csv")
      << "\n";
  out << "n = " << data.n << "\n";
  out << "dim = " << data.dim << "\n";
  out << "classes = " << data.classes << "\n";
  out << "noise = " << format_double(data.noise) << "\n";
  out << "separation = " << format_double(data.separation) << "\n";
  out << "generator_seed = " << data.generator_seed << "\n";
  out << "csv_train = " << data.csv_train << "\n";
  out << "csv_test = " << data.csv_test << "\n";
  out << "label_column = " << data.label_column << "\n";
  out << "regression = " << (data.regression ? "true" : "false") << "\n";
  out << "normalization = " << to_string(data.normalization) << "\n";
  out << "\n[train]\n";
  out << "preset = " << preset << "\n";
  out << "eta = " << format_double(train.eta) << "\n";
  out << "momentum = " << format_double(train.momentum) << "\n";
  out << "batch_train = " << format_double(train.batch_train) << "\n";
  out << "batch_valid = " << format_double(train.batch_valid) << "\n";
  out << "clip_train = " << format_double(train.clip_train) << "\n";
  out << "clip_valid = " << format_double(train.clip_valid) << "\n";
  out << "sigma_train = " << format_double(train.sigma_train) << "\n";
  out << "sigma_valid = " << format_double(train.sigma_valid) << "\n";
  out << "beta = " << format_double(train.beta) << "\n";
  out << "loss_clip = "
      << (train.loss_clip == LossClipMode::sign_discretize ? "sign" : "clamp")
      << "\n";
  out << "epsilon = " << format_double(train.target_epsilon) << "\n";
  out << "delta = " << format_double(train.delta) << "\n";
  out << "max_updates = " << train.max_accepted_updates << "\n";
  out << "max_iterations = " << train.max_iterations << "\n";
  out << "charge_validation = " << (train.charge_validation ? "true" : "false")
      << "\n";
  out << "eval_every = " << train.eval_every << "\n";
  return out.str();
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') {
          problems.push_back("line " + std::to_string(line_no) +
                             ": malformed section header '" + line + "'");
          continue;
        }
        section = trim(line.substr(1, line.size() - 2));
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        problems.push_back("line " + std::to_string(line_no) +
                           ": expected key = value, got '" + line + "'");
        continue;
      }
      const std::string key = section + "." + trim(line.substr(0, eq));
      if (values.count(key))
        problems.push_back("line " + std::to_string(line_no) +
                           ": duplicate key '" + key + "'");
      values[key] = trim(line.substr(eq + 1));
    }
  }

  bool has(const std::string& key) const { return values.count(key) > 0; }

  void take_string(const std::string& key, std::string& out) {
    auto it = values.find(key);
    if (it == values.end()) return;
    out = it->second;
    consumed.insert(key);
  }

  void take_double(const std::string& key, double& out) {
    auto it = values.find(key);
    if (it == values.end()) return;
    consumed.insert(key);
    if (it->second == "inf") {
      out = std::numeric_limits<double>::infinity();
      return;
    }
    if (it->second == "-inf") {
      out = -std::numeric_limits<double>::infinity();
      return;
    }
    try {
      std::size_t pos = 0;
      out = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("");
    } catch (...) {
      problems.push_back(key + ": not a number: '" + it->second + "'");
    }
  }

  template <typename Int>
  void take_int(const std::string& key, Int& out) {
    auto it = values.find(key);
    if (it == values.end()) return;
    consumed.insert(key);
    const std::string& s = it->second;
    Int v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      problems.push_back(key + ": not an integer: '" + s + "'");
      return;
    }
    out = v;
  }

  void take_bool(const std::string& key, bool& out) {
    auto it = values.find(key);
    if (it == values.end()) return;
    consumed.insert(key);
    if (it->second == "true") out = true;
    else if (it->second == "false") out = false;
    else problems.push_back(key + ": expected true or false, got '" +
                            it->second + "'");
  }

  template <typename T, typename Fn>
  void take_enum(const std::string& key, T& out, Fn parse) {
    auto it = values.find(key);
    if (it == values.end()) return;
    consumed.insert(key);
    try {
      out = parse(it->second);
    } catch (const std::exception& e) {
      problems.push_back(key + ": " + e.what());
    }
  }

  void finish() {
    for (const auto& [key, value] : values) {
      if (!consumed.count(key))
        problems.push_back("unknown key '" + key + "'");
    }
    if (!problems.empty()) throw ConfigError(problems);
  }

  std::map<std::string, std::string> values;
  std::set<std::string> consumed;
  std::vector<std::string> problems;
};

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  Parser p(text);
  ExperimentConfig cfg = default_config();

  p.take_enum("run.algorithm", cfg.algorithm, algorithm_from_string);
  if (p.has("run.seed")) cfg.seed_set = true;
  p.take_int("run.seed", cfg.seed);
  p.take_string("run.output_dir", cfg.output_dir);

  p.take_enum("model.kind", cfg.model_kind, model_kind_from_string);
  p.take_int("model.hidden_dim", cfg.hidden_dim);

  p.take_enum("data.source", cfg.data.source, [](const std::string& s) {
    if (s == "blobs") return DataSource::blobs;
    if (s == "linear") return DataSource::linear;
    if (s == "csv") return DataSource::csv;
    throw std::invalid_argument("unknown data source '" + s + "'");
  });
  p.take_int("data.n", cfg.data.n);
  p.take_int("data.dim", cfg.data.dim);
  p.take_int("data.classes", cfg.data.classes);
  p.take_double("data.noise", cfg.data.noise);
  p.take_double("data.separation", cfg.data.separation);
  p.take_int("data.generator_seed", cfg.data.generator_seed);
  p.take_string("data.csv_train", cfg.data.csv_train);
  p.take_string("data.csv_test", cfg.data.csv_test);
  p.take_string("data.label_column", cfg.data.label_column);
  p.take_bool("data.regression", cfg.data.regression);
  p.take_enum("data.normalization", cfg.data.normalization,
              normalization_from_string);

  p.take_string("train.preset", cfg.preset);
  const bool sigma_valid_in_file = p.has("train.sigma_valid");
  const bool batch_valid_in_file = p.has("train.batch_valid");
  p.take_double("train.eta", cfg.train.eta);
  p.take_double("train.momentum", cfg.train.momentum);
  p.take_double("train.batch_train", cfg.train.batch_train);
  p.take_double("train.batch_valid", cfg.train.batch_valid);
  p.take_double("train.clip_train", cfg.train.clip_train);
  p.take_double("train.clip_valid", cfg.train.clip_valid);
  p.take_double("train.sigma_train", cfg.train.sigma_train);
  p.take_double("train.sigma_valid", cfg.train.sigma_valid);
  p.take_double("train.beta", cfg.train.beta);
  p.take_enum("train.loss_clip", cfg.train.loss_clip, [](const std::string& s) {
    if (s == "sign") return LossClipMode::sign_discretize;
    if (s == "clamp") return LossClipMode::clamp;
    throw std::invalid_argument("loss_clip must be 'sign' or 'clamp'");
  });
  p.take_double("train.epsilon", cfg.train.target_epsilon);
  p.take_double("train.delta", cfg.train.delta);
  p.take_int("train.max_updates", cfg.train.max_accepted_updates);
  p.take_int("train.max_iterations", cfg.train.max_iterations);
  p.take_bool("train.charge_validation", cfg.train.charge_validation);
  p.take_int("train.eval_every", cfg.train.eval_every);

  if (cfg.preset != "none") {
    const auto& names = SigmaValidPreset::names();
    if (std::find(names.begin(), names.end(), cfg.preset) == names.end()) {
      p.problems.push_back("train.preset: unknown preset '" + cfg.preset +
                           "'");
    } else {
      const double eps = cfg.train.target_epsilon;
      if (eps != std::floor(eps) || eps < 1.0 || eps > 4.0) {
        p.problems.push_back(
            "train.preset: presets define sigma_valid for integer epsilon in "
            "1..4, got " + format_double(eps));
      } else {
        const SigmaValidPreset preset{cfg.preset};
        // explicit keys in the file win over preset values
        if (!sigma_valid_in_file)
          cfg.train.sigma_valid = preset.sigma_valid(static_cast<int>(eps));
        if (!batch_valid_in_file)
          cfg.train.batch_valid = preset.default_batch_valid();
      }
    }
  }

  p.finish();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace dpsur
