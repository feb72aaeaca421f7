#pragma once

#include <Eigen/Dense>

namespace rnnode {

using Vector = Eigen::VectorXd;
// Weights are stored row-major and dense.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace rnnode
