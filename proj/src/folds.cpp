#include "dynabe/folds.hpp"

#include "dynabe/errors.hpp"

namespace dynabe {

std::vector<Fold> make_time_folds(std::size_t n_rows, std::size_t k) {
    if (k < 2) {
        throw ParamError("fold count must be at least 2");
    }
    if (n_rows < k) {
        throw InsufficientDataError("fewer rows than folds");
    }

    const std::size_t base = n_rows / k;
    const std::size_t extra = n_rows % k;

    std::vector<std::pair<std::size_t, std::size_t>> blocks;  // [begin, end)
    std::size_t at = 0;
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t len = base + (i < extra ? 1 : 0);
        blocks.emplace_back(at, at + len);
        at += len;
    }

    std::vector<Fold> folds(k);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t r = 0; r < n_rows; ++r) {
            const bool held_out = r >= blocks[i].first && r < blocks[i].second;
            auto& dst = held_out ? folds[i].valid_rows : folds[i].train_rows;
            dst.push_back(static_cast<Eigen::Index>(r));
        }
    }
    return folds;
}

}  // namespace dynabe
