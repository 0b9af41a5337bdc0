#pragma once

#include <Eigen/Dense>

namespace gmvae {

using Index = Eigen::Index;

// All tensor values are dense 64-bit matrices with row-major storage.
// Vectors are carried as 1xN or Nx1 matrices depending on role; flat
// serialization (checkpoints, CSV) follows storage order.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

}  // namespace gmvae
