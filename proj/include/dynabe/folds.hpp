#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace dynabe {

struct Fold {
    std::vector<Eigen::Index> train_rows;
    std::vector<Eigen::Index> valid_rows;
};

/// Splits rows 0..n_rows-1 into k contiguous blocks in time order; fold i
/// holds block i out and trains on the rest. No shuffling, so fold layout is
/// a pure function of (n_rows, k).
std::vector<Fold> make_time_folds(std::size_t n_rows, std::size_t k);

}  // namespace dynabe
