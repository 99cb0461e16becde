#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "alr/dataset.hpp"
#include "alr/regression.hpp"

namespace alr {

/// The active-learning ledger for one pool.
///
/// Tracks the labeled samples in selection order, the unlabeled rest, and
/// one fitted model per task once at least K0 samples are labeled. Models
/// are refit from scratch after every label. Training rows are taken in
/// ascending pool order, so two states holding the same labeled set fit
/// bit-identical models regardless of selection order.
///
/// The state keeps a reference to `pool`; the Dataset must outlive it.
class PoolState {
 public:
  using Rng = std::mt19937_64;

  struct Options {
    /// Number of labels before models exist; 0 means "use d".
    std::size_t k0 = 0;
    /// K used to resolve a per-sample lambda; unset means "current count".
    std::optional<std::size_t> lambda_k;
  };

  PoolState(const Dataset& pool, SolverConfig solver, std::uint64_t seed);
  PoolState(const Dataset& pool, SolverConfig solver, std::uint64_t seed, Options options);

  const Dataset& pool() const { return *pool_; }
  std::size_t size() const { return pool_->size(); }
  std::size_t k0() const { return k0_; }
  const SolverConfig& solver() const { return solver_; }

  std::span<const Index> labeled() const { return labeled_; }
  std::size_t labeled_count() const { return labeled_.size(); }
  std::size_t unlabeled_count() const { return size() - labeled_.size(); }
  bool is_labeled(Index i) const { return is_labeled_.at(i); }
  /// Unlabeled indices in ascending order.
  std::vector<Index> unlabeled() const;

  bool has_models() const { return !models_.empty(); }
  /// Throws std::logic_error before K0 labels.
  const LinearModel& model(std::size_t task) const;
  std::span<const LinearModel> models() const { return models_; }

  /// Current model predictions for every pool row (N x P). Empty before K0.
  const Matrix& predictions() const { return predictions_; }

  /// Euclidean distance from pool row `row` to the j-th labeled sample.
  double labeled_distance(Index row, std::size_t j) const {
    return labeled_distances_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
  }

  /// Solver config with the per-sample lambda fixed for the current count.
  SolverConfig effective_solver() const;

  Rng& rng() { return rng_; }

  /// Appends `i` to the labeled list and refits when K0 is reached.
  void label(Index i);

 private:
  void refit();

  const Dataset* pool_;
  SolverConfig solver_;
  std::size_t k0_;
  std::optional<std::size_t> lambda_k_;
  Rng rng_;
  std::vector<Index> labeled_;
  std::vector<bool> is_labeled_;
  // Column j: distance of every pool row to labeled_[j]. Grows with labels.
  Matrix labeled_distances_;
  std::vector<LinearModel> models_;
  Matrix predictions_;
};

/// Training rows for the given indices, in the given order.
Matrix gather_rows(const Matrix& m, std::span<const Index> rows);

}  // namespace alr
