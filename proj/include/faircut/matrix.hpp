#pragma once

#include <Eigen/Dense>

namespace faircut {

// Node-major (row-major) dense matrix for embeddings and gradients;
// row i is node i's k-vector, so per-node scans are contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Eigen::MatrixXd;
using Eigen::VectorXd;

}  // namespace faircut
