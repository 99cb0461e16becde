#include "alr/pool_state.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace alr {

Matrix gather_rows(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

PoolState::PoolState(const Dataset& pool, SolverConfig solver, std::uint64_t seed)
    : PoolState(pool, std::move(solver), seed, Options{}) {}

PoolState::PoolState(const Dataset& pool, SolverConfig solver, std::uint64_t seed,
                     Options options)
    : pool_(&pool),
      solver_(std::move(solver)),
      k0_(options.k0 == 0 ? pool.dims() : options.k0),
      lambda_k_(options.lambda_k),
      rng_(seed),
      is_labeled_(pool.size(), false) {
  solver_.validate();
  labeled_.reserve(pool.size());
}

std::vector<Index> PoolState::unlabeled() const {
  std::vector<Index> out;
  out.reserve(unlabeled_count());
  for (Index i = 0; i < size(); ++i) {
    if (!is_labeled_[i]) out.push_back(i);
  }
  return out;
}

const LinearModel& PoolState::model(std::size_t task) const {
  if (models_.empty()) {
    throw std::logic_error("no models before " + std::to_string(k0_) + " labeled samples");
  }
  return models_.at(task);
}

SolverConfig PoolState::effective_solver() const {
  return solver_.resolved(lambda_k_.value_or(std::max<std::size_t>(labeled_.size(), 1)));
}

void PoolState::label(Index i) {
  if (i >= size()) throw std::out_of_range("label: index out of range");
  if (is_labeled_[i]) throw std::logic_error("label: sample already labeled");
  is_labeled_[i] = true;
  labeled_.push_back(i);

  const auto j = static_cast<Eigen::Index>(labeled_.size() - 1);
  if (labeled_distances_.cols() <= j) {
    const Eigen::Index cap = std::max<Eigen::Index>(8, 2 * labeled_distances_.cols());
    labeled_distances_.conservativeResize(static_cast<Eigen::Index>(size()), cap);
  }
  const Matrix& x = pool_->features();
  const auto row = x.row(static_cast<Eigen::Index>(i));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    labeled_distances_(r, j) = (x.row(r) - row).norm();
  }

  if (labeled_.size() >= k0_) refit();
}

void PoolState::refit() {
  std::vector<Index> rows(labeled_.begin(), labeled_.end());
  std::sort(rows.begin(), rows.end());
  const Matrix x = gather_rows(pool_->features(), rows);
  const Matrix y = gather_rows(pool_->labels(), rows);
  const SolverConfig solver = effective_solver();

  models_.clear();
  predictions_.resize(static_cast<Eigen::Index>(size()), y.cols());
  for (Eigen::Index t = 0; t < y.cols(); ++t) {
    models_.push_back(fit(x, y.col(t), solver));
    predictions_.col(t) = predict(models_.back(), pool_->features());
  }
}

}  // namespace alr
