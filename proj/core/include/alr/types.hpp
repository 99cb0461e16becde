#pragma once

#include <cstddef>

#include <Eigen/Dense>

namespace alr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Row index into a Dataset.
using Index = std::size_t;

}  // namespace alr
