#pragma once

#include <Eigen/Dense>

namespace dlgp {

// Sample matrices are row-major: one row per data point.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Eigen::Index;

struct PredictiveDistribution {
    double mean = 0.0;
    double variance = 0.0;
};

}  // namespace dlgp
