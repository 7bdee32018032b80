#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpsur/models.hpp"

namespace dpsur {

struct Dataset {
  std::vector<Example> examples;
  int feature_dim = 0;
  int num_classes = 0;   // 0 for regression
  bool regression = false;
  std::string name;
  std::string provenance;

  std::size_t size() const { return examples.size(); }
  void validate() const;
};

enum class Normalization { none, standardize, unit_range };

Normalization normalization_from_string(const std::string& name);
std::string to_string(Normalization n);

// Per-feature affine transform x' = (x - offset) / scale, fitted on the
// training split only and re-applied verbatim to evaluation data.
struct NormalizationStats {
  std::vector<double> offset;
  std::vector<double> scale;
};

struct CsvSchema {
  std::string label_column;
  std::vector<std::string> feature_columns;  // empty: all non-label columns
  bool regression = false;
  int num_classes = 0;  // 0: infer from the file (training split)
};

// Loads a headered CSV. Ragged rows, non-numeric cells and out-of-range
// labels are collected and reported all at once, each with its row number.
// When `fitted` is provided its transform is applied; otherwise stats are
// computed from this file (and returned through `out_stats` if non-null).
Dataset load_csv(const std::string& path, const CsvSchema& schema,
                 Normalization normalization,
                 NormalizationStats* out_stats = nullptr,
                 const NormalizationStats* fitted = nullptr);

enum class SyntheticKind { linear_regression, gaussian_blobs };

SyntheticKind synthetic_kind_from_string(const std::string& name);
std::string to_string(SyntheticKind k);

struct SyntheticData {
  Dataset train;
  Dataset test;
  std::vector<double> true_params;  // generator ground truth
};

// Deterministic synthetic data, split 80/20 train/test by a seeded shuffle.
// linear_regression: x ~ N(0, I), y = w*.x + b* + noise * N(0,1); the
// returned true_params are [w*, b*]. gaussian_blobs: k clusters with
// per-coordinate std `noise`, centers pairwise `separation` apart.
SyntheticData generate_synthetic(SyntheticKind kind, std::size_t n, int d,
                                 int k, double noise, std::uint64_t seed,
                                 double separation = 0.0);

void write_csv(const Dataset& data, const std::string& path);

}  // namespace dpsur
