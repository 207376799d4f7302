#pragma once

#include <Eigen/Dense>

namespace fvenc {

// Row-major throughout so Eigen buffers map 1:1 onto tensor file payloads.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

using Index = Eigen::Index;

}  // namespace fvenc
