#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dynabe/frame.hpp"

namespace dynabe {

/// Row-per-date matrix of the named feature columns, restricted to the given
/// rows (row indices into the frame).
Eigen::MatrixXd to_matrix(const FeatureFrame& frame,
                          const std::vector<std::size_t>& rows,
                          const std::vector<std::string>& feature_cols);

Eigen::VectorXd labels_vector(const TrendLabels& labels,
                              const std::vector<std::size_t>& rows);

}  // namespace dynabe
