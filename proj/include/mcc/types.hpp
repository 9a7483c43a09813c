#pragma once

#include <Eigen/Dense>

namespace mcc {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Array = Eigen::ArrayXd;
using ArrayXX = Eigen::ArrayXXd;
using IntMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace mcc
