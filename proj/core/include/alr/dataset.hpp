#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alr/types.hpp"

namespace alr {

/// Immutable table of N samples with d features and P regression targets.
///
/// Construction validates the shape and finiteness invariants, so every
/// Dataset in circulation is well formed. Optional group tags (e.g. speaker
/// gender) are carried along for selection diagnostics only.
class Dataset {
 public:
  Dataset(Matrix features, Matrix labels,
          std::vector<std::string> feature_names = {},
          std::vector<std::string> task_names = {},
          std::optional<std::vector<std::string>> group = std::nullopt,
          std::string group_name = "group");

  std::size_t size() const { return static_cast<std::size_t>(features_.rows()); }
  std::size_t dims() const { return static_cast<std::size_t>(features_.cols()); }
  std::size_t tasks() const { return static_cast<std::size_t>(labels_.cols()); }

  const Matrix& features() const { return features_; }
  const Matrix& labels() const { return labels_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& task_names() const { return task_names_; }
  const std::optional<std::vector<std::string>>& group() const { return group_; }
  const std::string& group_name() const { return group_name_; }
  bool has_group() const { return group_.has_value(); }

  /// Rows in the given order. Indices must be < size().
  Dataset subset(std::span<const Index> rows) const;

  /// Same labels/tags/names, replacement features (must keep N×d).
  Dataset with_features(Matrix features) const;

  /// Same features/tags/names, replacement labels (must keep N×P).
  Dataset with_labels(Matrix labels) const;

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  Matrix features_;
  Matrix labels_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> task_names_;
  std::optional<std::vector<std::string>> group_;
  std::string group_name_;
};

/// Per-column affine map fitted by normalize_features.
struct NormalizationParams {
  std::vector<std::string> names;
  Vector mean;
  Vector stddev;

  /// Maps features through (x - mean) / stddev. Column count must match.
  Dataset apply(const Dataset& data) const;

  /// {"<column>": {"mean": m, "std": s}, ...} in column order.
  std::string to_json() const;
  static NormalizationParams from_json(const std::string& text);
};

struct NormalizedDataset {
  Dataset data;
  NormalizationParams params;
};

/// Z-scores every feature column with the N-1 standard deviation. Constant
/// columns become zero and record std = 1. Requires N >= 2.
NormalizedDataset normalize_features(const Dataset& data);

/// Reads a comma-separated file with a mandatory header row. The last
/// `task_count` numeric columns are labels, the other numeric columns are
/// features, and `group_column` (if named) is kept as a string tag.
Dataset load_csv(const std::filesystem::path& path, std::size_t task_count,
                 const std::optional<std::string>& group_column = std::nullopt);

/// Writes features, the group column (if any), then labels. Values use 17
/// significant digits so load_csv reproduces them bit-exactly.
void write_csv(const Dataset& data, const std::filesystem::path& path);

struct SplitConfig {
  double train_fraction = 0.3;
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<Index> pool;  // ascending
  std::vector<Index> test;  // ascending
};

/// Number of pool rows for n samples: round(n * fraction).
std::size_t pool_size_for(std::size_t n, double train_fraction);

/// Uniform random partition of 0..n-1; deterministic per seed.
SplitIndices split_indices(std::size_t n, const SplitConfig& cfg);

struct TrainTestSplit {
  Dataset pool;
  Dataset test;
  SplitIndices indices;
};

TrainTestSplit split_train_test(const Dataset& data, const SplitConfig& cfg);

struct SyntheticDataset {
  Dataset data;
  /// Ground-truth coefficient vector per task (length d each).
  std::vector<Vector> coefficients;
};

/// Standard-normal features, labels = X * beta_p + N(0, noise_std^2) with
/// beta_p ~ N(0, I). No intercept. Deterministic per seed.
SyntheticDataset gen_synthetic(std::size_t n, std::size_t d, std::size_t p,
                               double noise_std, std::uint64_t seed);

}  // namespace alr
