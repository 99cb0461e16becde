#include "alr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alr/error.hpp"

namespace alr {

double rmse(const Eigen::Ref<const Vector>& predicted, const Eigen::Ref<const Vector>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("rmse: length mismatch");
  if (predicted.size() == 0) throw std::invalid_argument("rmse: empty input");
  return std::sqrt((predicted - truth).squaredNorm() / static_cast<double>(predicted.size()));
}

std::optional<double> pearson_cc(const Eigen::Ref<const Vector>& predicted,
                                 const Eigen::Ref<const Vector>& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("pearson_cc: length mismatch");
  if (predicted.size() < 2) throw std::invalid_argument("pearson_cc: needs at least 2 values");
  const Vector a = predicted.array() - predicted.mean();
  const Vector b = truth.array() - truth.mean();
  const double saa = a.squaredNorm();
  const double sbb = b.squaredNorm();
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  const double r = a.dot(b) / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

double label_std(const Dataset& pool, std::span<const Index> labeled, std::size_t task) {
  if (labeled.size() < 2) throw std::invalid_argument("label_std: needs at least 2 samples");
  if (task >= pool.tasks()) throw std::out_of_range("label_std: task out of range");
  const auto col = pool.labels().col(static_cast<Eigen::Index>(task));
  double mean = 0.0;
  for (Index i : labeled) mean += col(static_cast<Eigen::Index>(i));
  mean /= static_cast<double>(labeled.size());
  double ss = 0.0;
  for (Index i : labeled) {
    const double d = col(static_cast<Eigen::Index>(i)) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(labeled.size() - 1));
}

double group_fraction(const Dataset& pool, std::span<const Index> labeled,
                      const std::string& group_value) {
  if (!pool.has_group()) throw DataError("group_fraction: dataset has no group column");
  if (labeled.empty()) throw std::invalid_argument("group_fraction: nothing selected");
  std::size_t hits = 0;
  for (Index i : labeled) hits += (*pool.group()).at(i) == group_value ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(labeled.size());
}

}  // namespace alr
