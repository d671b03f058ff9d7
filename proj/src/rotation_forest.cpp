#include "dynabe/rotation_forest.hpp"

#include "dynabe/errors.hpp"
#include "dynabe/rng.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace dynabe::learners {

Eigen::VectorXd RotationForestModel::rotate(const FeatureRotation& rot,
                                            const Eigen::VectorXd& x) const {
    Eigen::VectorXd out(x.size());
    Eigen::Index at = 0;
    for (std::size_t g = 0; g < rot.groups.size(); ++g) {
        const auto& cols = rot.groups[g];
        Eigen::VectorXd block(static_cast<Eigen::Index>(cols.size()));
        for (std::size_t k = 0; k < cols.size(); ++k) {
            block(static_cast<Eigen::Index>(k)) = x(cols[k]) - rot.means[g](static_cast<Eigen::Index>(k));
        }
        const Eigen::VectorXd rotated = rot.components[g].transpose() * block;
        out.segment(at, rotated.size()) = rotated;
        at += rotated.size();
    }
    return out;
}

double RotationForestModel::score(const Eigen::VectorXd& x) const {
    double acc = 0.0;
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        acc += trees_[t].score(rotate(rotations_[t], x));
    }
    return acc / static_cast<double>(trees_.size());
}

RotationForestModel fit_rotation_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                        const RotationForestParams& params) {
    if (params.n_trees < 1) throw ParamError("rotation forest needs at least one tree");
    if (params.subset_size < 1) throw ParamError("rotation forest subset_size must be positive");
    check_finite(X, y);
    const Eigen::Index n = X.rows();
    const int d = static_cast<int>(X.cols());
    if (n < 2) {
        throw InsufficientDataError("rotation forest needs at least two rows");
    }

    std::vector<FeatureRotation> rotations;
    std::vector<CartModel> trees;
    rotations.reserve(static_cast<std::size_t>(params.n_trees));
    trees.reserve(static_cast<std::size_t>(params.n_trees));

    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(derive_seed(params.seed, "rot_tree", static_cast<std::uint64_t>(t)));

        std::vector<int> order(static_cast<std::size_t>(d));
        for (int j = 0; j < d; ++j) order[static_cast<std::size_t>(j)] = j;
        rng.shuffle(order);

        FeatureRotation rot;
        for (int start = 0; start < d; start += params.subset_size) {
            const int end = std::min(start + params.subset_size, d);
            rot.groups.emplace_back(order.begin() + start, order.begin() + end);
        }

        for (const auto& cols : rot.groups) {
            const auto m = static_cast<Eigen::Index>(cols.size());
            Eigen::MatrixXd block(n, m);
            for (Eigen::Index k = 0; k < m; ++k) {
                block.col(k) = X.col(cols[static_cast<std::size_t>(k)]);
            }
            const Eigen::VectorXd mean = block.colwise().mean();
            block.rowwise() -= mean.transpose();
            const Eigen::MatrixXd cov =
                (block.transpose() * block) / static_cast<double>(n - 1);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
            if (solver.info() != Eigen::Success) {
                throw ConvergenceError("rotation forest pca failed to converge", 0.0);
            }
            rot.means.push_back(mean);
            rot.components.push_back(solver.eigenvectors());  // all components kept
        }

        Eigen::MatrixXd rotated(n, d);
        {
            Eigen::Index at = 0;
            for (std::size_t g = 0; g < rot.groups.size(); ++g) {
                const auto& cols = rot.groups[g];
                const auto m = static_cast<Eigen::Index>(cols.size());
                Eigen::MatrixXd block(n, m);
                for (Eigen::Index k = 0; k < m; ++k) {
                    block.col(k) = X.col(cols[static_cast<std::size_t>(k)]);
                }
                block.rowwise() -= rot.means[g].transpose();
                rotated.middleCols(at, m) = block * rot.components[g];
                at += m;
            }
        }

        CartParams tree_params;  // unpruned, every rotated feature eligible
        trees.push_back(fit_cart(rotated, y, tree_params, rng));
        rotations.push_back(std::move(rot));
    }

    return RotationForestModel(std::move(rotations), std::move(trees), params);
}

}  // namespace dynabe::learners
