#include "dynabe/tree.hpp"

#include "dynabe/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dynabe::learners {

namespace {

double gini(double n1, double n) {
    if (n <= 0.0) return 0.0;
    const double p1 = n1 / n;
    return 2.0 * p1 * (1.0 - p1);
}

struct TreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& y;
    const CartParams& params;
    Rng& rng;
    std::vector<TreeNode> nodes;

    int build(std::vector<Eigen::Index>& rows, int depth) {
        const double n = static_cast<double>(rows.size());
        double n1 = 0.0;
        for (Eigen::Index r : rows) n1 += y(r);

        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[id].prob1 = n1 / n;

        const bool pure = n1 == 0.0 || n1 == n;
        const bool depth_capped = params.max_depth >= 0 && depth >= params.max_depth;
        if (pure || depth_capped || rows.size() < 2 * static_cast<std::size_t>(params.min_leaf) ||
            rows.size() < 2) {
            return id;
        }

        const int d = static_cast<int>(X.cols());
        std::vector<int> features;
        if (params.mtry > 0 && params.mtry < d) {
            auto picked = rng.sample_without_replacement(static_cast<std::size_t>(d),
                                                         static_cast<std::size_t>(params.mtry));
            features.assign(picked.begin(), picked.end());
            std::sort(features.begin(), features.end());
        } else {
            features.resize(d);
            for (int j = 0; j < d; ++j) features[j] = j;
        }

        const double parent_impurity = gini(n1, n);
        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 1e-12;  // require a strictly positive gain

        std::vector<std::pair<double, double>> vals;  // (feature value, label)
        vals.reserve(rows.size());
        for (int j : features) {
            vals.clear();
            for (Eigen::Index r : rows) vals.emplace_back(X(r, j), y(r));
            std::sort(vals.begin(), vals.end());

            double left_n = 0.0, left_n1 = 0.0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                left_n += 1.0;
                left_n1 += vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue;
                if (left_n < params.min_leaf || n - left_n < params.min_leaf) continue;
                const double right_n = n - left_n;
                const double weighted = (left_n / n) * gini(left_n1, left_n) +
                                        (right_n / n) * gini(n1 - left_n1, right_n);
                const double gain = parent_impurity - weighted;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_feature = j;
                    best_threshold = 0.5 * (vals[i].first + vals[i + 1].first);
                }
            }
        }

        if (best_feature < 0) {
            return id;
        }

        std::vector<Eigen::Index> left_rows, right_rows;
        for (Eigen::Index r : rows) {
            (X(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        nodes[id].is_leaf = false;
        nodes[id].feature = best_feature;
        nodes[id].threshold = best_threshold;
        const int left_id = build(left_rows, depth + 1);
        nodes[id].left = left_id;
        const int right_id = build(right_rows, depth + 1);
        nodes[id].right = right_id;
        return id;
    }
};

}  // namespace

double CartModel::score(const Eigen::VectorXd& x) const {
    int id = 0;
    while (!nodes_[id].is_leaf) {
        id = x(nodes_[id].feature) <= nodes_[id].threshold ? nodes_[id].left
                                                           : nodes_[id].right;
    }
    return nodes_[id].prob1;
}

CartModel fit_cart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const std::vector<Eigen::Index>& rows, const CartParams& params,
                   Rng& rng) {
    if (params.min_leaf < 1) {
        throw ParamError("cart min_leaf must be at least 1");
    }
    if (rows.empty()) {
        throw InsufficientDataError("cart needs at least one training row");
    }
    for (Eigen::Index r : rows) {
        if (r < 0 || r >= X.rows()) {
            throw ParamError("cart row index out of range");
        }
    }
    TreeBuilder builder{X, y, params, rng, {}};
    std::vector<Eigen::Index> work(rows);
    builder.build(work, 0);
    return CartModel(std::move(builder.nodes), params);
}

CartModel fit_cart(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                   const CartParams& params, Rng& rng) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
    return fit_cart(X, y, rows, params, rng);
}

double RandomForestModel::score(const Eigen::VectorXd& x) const {
    double votes = 0.0;
    for (const auto& tree : trees_) {
        votes += tree.classify(x);
    }
    return votes / static_cast<double>(trees_.size());
}

RandomForestModel fit_random_forest(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                    const RandomForestParams& params) {
    if (params.n_trees < 1) {
        throw ParamError("random forest needs at least one tree");
    }
    check_finite(X, y);
    const Eigen::Index n = X.rows();
    if (n < 2) {
        throw InsufficientDataError("random forest needs at least two rows");
    }

    int mtry = params.mtry;
    if (mtry < 0) {
        mtry = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(X.cols())))));
    }
    if (mtry > X.cols()) {
        throw ParamError("random forest mtry exceeds the feature count");
    }

    std::vector<CartModel> trees;
    std::vector<std::vector<Eigen::Index>> oob;
    trees.reserve(static_cast<std::size_t>(params.n_trees));
    oob.reserve(static_cast<std::size_t>(params.n_trees));

    CartParams tree_params;
    tree_params.mtry = mtry;

    for (int t = 0; t < params.n_trees; ++t) {
        Rng rng(derive_seed(params.seed, "rf_tree", static_cast<std::uint64_t>(t)));
        std::vector<Eigen::Index> rows;
        std::vector<Eigen::Index> out;
        if (params.bootstrap) {
            std::vector<bool> seen(static_cast<std::size_t>(n), false);
            rows.reserve(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
                rows.push_back(pick);
                seen[static_cast<std::size_t>(pick)] = true;
            }
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!seen[static_cast<std::size_t>(i)]) out.push_back(i);
            }
        } else {
            rows.resize(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
        }
        trees.push_back(fit_cart(X, y, rows, tree_params, rng));
        oob.push_back(std::move(out));
    }

    RandomForestParams resolved = params;
    resolved.mtry = mtry;
    return RandomForestModel(std::move(trees), std::move(oob), resolved);
}

}  // namespace dynabe::learners
