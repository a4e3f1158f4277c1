#pragma once

#include <complex>

#include <Eigen/Dense>

namespace affine {

using Complex = std::complex<double>;
using Vec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

}  // namespace affine
