#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alr/dataset.hpp"
#include "alr/metrics.hpp"
#include "alr/regression.hpp"
#include "alr/strategies.hpp"

namespace alr {

/// Which K a per-sample lambda (ridge 10/K) is divided by.
enum class LambdaReference {
  labeled_count,  // current number of labels, recomputed after each query
  budget,         // the final query budget (k_max or pool size)
};

struct ExperimentConfig {
  StrategySpec strategy;
  SolverConfig solver = SolverConfig::ridge_per_sample(10.0);
  double train_fraction = 0.3;
  std::size_t runs = 100;
  /// Stop after this many labels; defaults to the whole pool.
  std::optional<std::size_t> k_max;
  /// Normalize the full dataset once (true) or fit normalization on each
  /// pool and apply it to the matching test set (false).
  bool normalize_before_split = true;
  std::uint64_t seed = 0;
  /// Group tag whose selection share is tracked (e.g. "male").
  std::optional<std::string> group_value;
  LambdaReference lambda_reference = LambdaReference::labeled_count;
  /// Worker threads for independent runs; results do not depend on it.
  std::size_t threads = 1;

  void validate() const;
  std::string to_json() const;
};

/// Seed of run r: seed xor r.
std::uint64_t run_seed(std::uint64_t seed, std::size_t run);

/// BL2: one model per task fit on every pool sample.
std::vector<LinearModel> full_pool_models(const Dataset& pool, const SolverConfig& solver);

struct RunResult {
  /// One record per K from K0 to the last query, ascending.
  std::vector<MetricRecord> records;
  /// Full selection order (including the K0 warm-up).
  std::vector<Index> selection;
  std::vector<double> bl2_rmse;
  std::vector<std::optional<double>> bl2_cc;
};

/// One active-learning run on a fixed pool/test pair. `seed` drives the
/// strategy's random stream (random draws and bootstraps).
RunResult run_single(const Dataset& pool, const Dataset& test, const ExperimentConfig& cfg,
                     std::uint64_t seed);

/// Mean and sample standard deviation over runs, skipping missing values.
/// `n` is the number of runs that contributed; `mean` is NaN when n == 0.
struct Stat {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

struct CurveSeries {
  std::string metric;  // rmse, cc, coef_mae, label_std, bl2_rmse, bl2_cc, group_fraction
  std::string task;    // task name, or "all" for task-independent metrics
  std::vector<Stat> values;  // aligned with LearningCurve::ks
};

struct LearningCurve {
  std::string strategy;
  std::string solver;
  std::vector<std::string> task_names;
  std::vector<std::size_t> ks;
  std::size_t runs = 0;
  std::vector<CurveSeries> series;
  std::string config_json;

  const CurveSeries* find(std::string_view metric, std::string_view task) const;
  /// Throws std::out_of_range when absent.
  const CurveSeries& at(std::string_view metric, std::string_view task) const;
  std::optional<std::size_t> position_of(std::size_t k) const;
};

/// Folds per-run records into a curve. All runs must share the K axis.
LearningCurve aggregate_runs(std::span<const RunResult> runs,
                             const std::vector<std::string>& task_names,
                             const std::optional<std::string>& group_value);

/// Repeats split + run_single `cfg.runs` times and aggregates. Run r uses
/// run_seed(cfg.seed, r), so equal seeds give equal splits across strategies.
LearningCurve run_experiment(const Dataset& data, const ExperimentConfig& cfg);

enum class Measure { rmse, cc };

Measure parse_measure(std::string_view text);

struct SavedQueries {
  std::string task;
  std::optional<std::size_t> k_candidate;
  std::optional<std::size_t> k_reference;

  /// (k_reference - k_candidate) / k_candidate * 100, when both were reached.
  std::optional<double> saving_percent() const;
};

/// Smallest K at which each curve's mean reaches (100+alpha)% of the
/// reference BL2 RMSE (or (100-alpha)% of its CC), per task.
std::vector<SavedQueries> saved_queries(const LearningCurve& candidate,
                                        const LearningCurve& reference, double alpha,
                                        Measure measure);

/// Relative improvement over a baseline in percent; positive is better for
/// both measures (lower RMSE, higher CC).
double improvement_percent(Measure measure, double baseline, double value);

struct UniqueQueryCount {
  std::size_t mt = 0;
  std::size_t st_union = 0;
};

UniqueQueryCount unique_query_count(std::span<const Index> mt_sequence,
                                    std::span<const std::vector<Index>> st_sequences);

/// Selection order of `count` labels for one strategy on a fixed pool.
std::vector<Index> selection_sequence(const Dataset& pool, const StrategySpec& spec,
                                      const SolverConfig& solver, std::size_t count,
                                      std::uint64_t seed);

}  // namespace alr
