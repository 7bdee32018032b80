#include "dpsur/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dpsur {

void Dataset::validate() const {
  if (feature_dim < 1) throw std::invalid_argument("Dataset: feature_dim >= 1");
  if (!regression && num_classes < 2)
    throw std::invalid_argument("Dataset: classification needs >= 2 classes");
  for (const auto& ex : examples) {
    if (static_cast<int>(ex.features.size()) != feature_dim)
      throw std::invalid_argument("Dataset: inconsistent feature dimension");
    for (double v : ex.features)
      if (!std::isfinite(v))
        throw std::invalid_argument("Dataset: non-finite feature");
    if (!regression && (ex.label < 0 || ex.label >= num_classes))
      throw std::invalid_argument("Dataset: label out of range");
  }
}

Normalization normalization_from_string(const std::string& name) {
  if (name == "none") return Normalization::none;
  if (name == "standardize") return Normalization::standardize;
  if (name == "unit_range") return Normalization::unit_range;
  throw std::invalid_argument("unknown normalization '" + name + "'");
}

std::string to_string(Normalization n) {
  switch (n) {
    case Normalization::none: return "none";
    case Normalization::standardize: return "standardize";
    case Normalization::unit_range: return "unit_range";
  }
  return "?";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    // trim surrounding whitespace
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

NormalizationStats fit_normalization(const std::vector<Example>& examples,
                                     int dim, Normalization mode) {
  NormalizationStats st;
  st.offset.assign(dim, 0.0);
  st.scale.assign(dim, 1.0);
  if (mode == Normalization::none || examples.empty()) return st;
  if (mode == Normalization::standardize) {
    const double n = static_cast<double>(examples.size());
    std::vector<double> mean(dim, 0.0), sq(dim, 0.0);
    for (const auto& ex : examples)
      for (int j = 0; j < dim; ++j) mean[j] += ex.features[j];
    for (int j = 0; j < dim; ++j) mean[j] /= n;
    for (const auto& ex : examples)
      for (int j = 0; j < dim; ++j) {
        const double c = ex.features[j] - mean[j];
        sq[j] += c * c;
      }
    for (int j = 0; j < dim; ++j) {
      st.offset[j] = mean[j];
      const double sd = std::sqrt(sq[j] / n);
      st.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return st;
  }
  // unit_range: map the observed [min, max] onto [0, 1]
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (const auto& ex : examples)
    for (int j = 0; j < dim; ++j) {
      lo[j] = std::min(lo[j], ex.features[j]);
      hi[j] = std::max(hi[j], ex.features[j]);
    }
  for (int j = 0; j < dim; ++j) {
    st.offset[j] = lo[j];
    st.scale[j] = hi[j] > lo[j] ? hi[j] - lo[j] : 1.0;
  }
  return st;
}

void apply_normalization(std::vector<Example>& examples,
                         const NormalizationStats& st) {
  for (auto& ex : examples)
    for (std::size_t j = 0; j < ex.features.size(); ++j)
      ex.features[j] = (ex.features[j] - st.offset[j]) / st.scale[j];
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema,
                 Normalization normalization, NormalizationStats* out_stats,
                 const NormalizationStats* fitted) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("load_csv: '" + path + "' is empty");
  const auto header = split_csv_line(line);

  int label_col = -1;
  std::vector<int> feature_cols;
  std::vector<std::string> errors;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == schema.label_column) label_col = static_cast<int>(j);
  }
  if (label_col < 0)
    errors.push_back("label column '" + schema.label_column + "' not found");
  if (schema.feature_columns.empty()) {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (static_cast<int>(j) != label_col)
        feature_cols.push_back(static_cast<int>(j));
  } else {
    for (const auto& name : schema.feature_columns) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end())
        errors.push_back("feature column '" + name + "' not found");
      else
        feature_cols.push_back(static_cast<int>(it - header.begin()));
    }
  }
  if (!errors.empty()) {
    std::string msg = "load_csv: '" + path + "':";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }

  Dataset data;
  data.feature_dim = static_cast<int>(feature_cols.size());
  data.regression = schema.regression;
  data.name = path;
  data.provenance = "csv:" + path;
  int max_label = -1;
  long row = 1;  // header was row 1
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      errors.push_back("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " cells, found " +
                       std::to_string(cells.size()));
      continue;
    }
    Example ex;
    ex.features.resize(feature_cols.size());
    bool ok = true;
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
      if (!parse_double(cells[feature_cols[j]], ex.features[j])) {
        errors.push_back("row " + std::to_string(row) + ": non-numeric cell '" +
                         cells[feature_cols[j]] + "' in column '" +
                         header[feature_cols[j]] + "'");
        ok = false;
      }
    }
    const std::string& label_cell = cells[label_col];
    if (schema.regression) {
      if (!parse_double(label_cell, ex.target)) {
        errors.push_back("row " + std::to_string(row) +
                         ": non-numeric target '" + label_cell + "'");
        ok = false;
      }
    } else {
      double parsed = 0.0;
      const double class_cap =
          schema.num_classes > 0 ? schema.num_classes : 1e9;
      if (!parse_double(label_cell, parsed) || parsed != std::floor(parsed) ||
          parsed < 0.0 || parsed >= class_cap) {
        errors.push_back("row " + std::to_string(row) + ": unknown label '" +
                         label_cell + "'");
        ok = false;
      } else {
        ex.label = static_cast<int>(parsed);
        max_label = std::max(max_label, ex.label);
      }
    }
    if (ok) data.examples.push_back(std::move(ex));
  }
  if (!errors.empty()) {
    std::string msg = "load_csv: '" + path + "':";
    for (const auto& e : errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  if (data.examples.empty())
    throw std::runtime_error("load_csv: '" + path + "' has no data rows");
  data.num_classes = schema.regression
                         ? 0
                         : (schema.num_classes > 0 ? schema.num_classes
                                                   : max_label + 1);

  NormalizationStats stats =
      fitted ? *fitted
             : fit_normalization(data.examples, data.feature_dim, normalization);
  if (normalization != Normalization::none || fitted)
    apply_normalization(data.examples, stats);
  if (out_stats) *out_stats = stats;
  data.validate();
  return data;
}

SyntheticKind synthetic_kind_from_string(const std::string& name) {
  if (name == "linear_regression" || name == "linear")
    return SyntheticKind::linear_regression;
  if (name == "gaussian_blobs" || name == "blobs")
    return SyntheticKind::gaussian_blobs;
  throw std::invalid_argument("unknown synthetic kind '" + name + "'");
}

std::string to_string(SyntheticKind k) {
  return k == SyntheticKind::linear_regression ? "linear_regression"
                                               : "gaussian_blobs";
}

SyntheticData generate_synthetic(SyntheticKind kind, std::size_t n, int d,
                                 int k, double noise, std::uint64_t seed,
                                 double separation) {
  if (n < 2 || d < 1) throw std::invalid_argument("generate_synthetic: n >= 2, d >= 1");
  if (!(noise >= 0.0)) throw std::invalid_argument("generate_synthetic: noise >= 0");
  RngStream rng = RngStream::derive(seed, 0x5d47a);
  SyntheticData out;
  std::vector<Example> all(n);

  if (kind == SyntheticKind::linear_regression) {
    out.true_params.resize(d + 1);
    for (int j = 0; j <= d; ++j)
      out.true_params[j] = 2.0 * rng.uniform() - 1.0;
    for (auto& ex : all) {
      ex.features.resize(d);
      double y = out.true_params[d];
      for (int j = 0; j < d; ++j) {
        ex.features[j] = rng.gaussian();
        y += out.true_params[j] * ex.features[j];
      }
      ex.target = y + noise * rng.gaussian();
    }
  } else {
    if (k < 2) throw std::invalid_argument("generate_synthetic: blobs need k >= 2");
    if (k > d)
      throw std::invalid_argument(
          "generate_synthetic: blobs need k <= d (axis-aligned centers)");
    if (separation <= 0.0) separation = 10.0 * std::max(noise, 1e-12);
    // Centers on distinct coordinate axes at radius separation/sqrt(2), so
    // every pair of centers is exactly `separation` apart.
    const double radius = separation / std::sqrt(2.0);
    out.true_params.resize(static_cast<std::size_t>(k) * d, 0.0);
    for (int c = 0; c < k; ++c)
      out.true_params[static_cast<std::size_t>(c) * d + c] = radius;
    for (auto& ex : all) {
      ex.label = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k));
      ex.features.resize(d);
      for (int j = 0; j < d; ++j)
        ex.features[j] = out.true_params[static_cast<std::size_t>(ex.label) * d + j] +
                         noise * rng.gaussian();
    }
  }

  // Seed-deterministic shuffle, then 80/20 split.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.next_u64() % (i + 1);
    std::swap(all[i], all[j]);
  }
  const std::size_t n_train = std::max<std::size_t>(1, (n * 8) / 10);
  const bool regression = kind == SyntheticKind::linear_regression;
  const int classes = regression ? 0 : k;
  out.train = Dataset{{all.begin(), all.begin() + n_train}, d, classes,
                      regression, to_string(kind) + "-train",
                      "synthetic:" + to_string(kind) + ":seed=" + std::to_string(seed)};
  out.test = Dataset{{all.begin() + n_train, all.end()}, d, classes, regression,
                     to_string(kind) + "-test",
                     "synthetic:" + to_string(kind) + ":seed=" + std::to_string(seed)};
  out.train.validate();
  out.test.validate();
  return out;
}

void write_csv(const Dataset& data, const std::string& path) {
  std::ofstream outfile(path);
  if (!outfile) throw std::runtime_error("write_csv: cannot open '" + path + "'");
  outfile.precision(17);
  for (int j = 0; j < data.feature_dim; ++j) outfile << "x" << j << ",";
  outfile << (data.regression ? "target" : "label") << "\n";
  for (const auto& ex : data.examples) {
    for (double v : ex.features) outfile << v << ",";
    if (data.regression)
      outfile << ex.target << "\n";
    else
      outfile << ex.label << "\n";
  }
}

}  // namespace dpsur
