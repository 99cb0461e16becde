#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alr/dataset.hpp"

namespace alr {

double rmse(const Eigen::Ref<const Vector>& predicted, const Eigen::Ref<const Vector>& truth);

/// Pearson correlation. Returns nullopt (undefined, not zero) when either
/// input is constant. Requires equal lengths >= 2.
std::optional<double> pearson_cc(const Eigen::Ref<const Vector>& predicted,
                                 const Eigen::Ref<const Vector>& truth);

/// Sample (N-1) standard deviation of the true labels of the selected rows.
double label_std(const Dataset& pool, std::span<const Index> labeled, std::size_t task);

/// Share of selected rows whose group tag equals `group_value`.
double group_fraction(const Dataset& pool, std::span<const Index> labeled,
                      const std::string& group_value);

/// Test-set metrics after K labels. Per-task vectors have P entries;
/// undefined values are nullopt.
struct MetricRecord {
  std::size_t k = 0;
  std::vector<double> rmse;
  std::vector<std::optional<double>> cc;
  std::vector<double> coef_mae;
  std::vector<std::optional<double>> label_std;
  std::optional<double> group_fraction;
};

}  // namespace alr
