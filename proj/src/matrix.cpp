#include "dynabe/matrix.hpp"

#include "dynabe/errors.hpp"

namespace dynabe {

Eigen::MatrixXd to_matrix(const FeatureFrame& frame,
                          const std::vector<std::size_t>& rows,
                          const std::vector<std::string>& feature_cols) {
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(feature_cols.size()));
    for (std::size_t j = 0; j < feature_cols.size(); ++j) {
        const auto& col = frame.column(feature_cols[j]);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                col.at(rows[i]);
        }
    }
    return X;
}

Eigen::VectorXd labels_vector(const TrendLabels& labels,
                              const std::vector<std::size_t>& rows) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) =
            static_cast<double>(labels.labels.at(rows[i]));
    }
    return y;
}

}  // namespace dynabe
