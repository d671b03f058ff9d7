#include "dynabe/gbt.hpp"

#include "dynabe/errors.hpp"
#include "dynabe/rng.hpp"

#include <algorithm>
#include <cmath>

namespace dynabe::learners {

namespace {

double shrink(double g, double alpha) {
    if (g > alpha) return g - alpha;
    if (g < -alpha) return g + alpha;
    return 0.0;
}

void validate(const GbtParams& p) {
    if (p.n_rounds < 0) throw ParamError("gbt n_rounds must be non-negative");
    if (!(p.eta > 0.0) || p.eta > 1.0) throw ParamError("gbt eta must lie in (0, 1]");
    if (p.max_depth < 1) throw ParamError("gbt max_depth must be at least 1");
    if (p.min_child_weight < 0.0) throw ParamError("gbt min_child_weight must be non-negative");
    if (!(p.subsample > 0.0) || p.subsample > 1.0) {
        throw ParamError("gbt subsample must lie in (0, 1]");
    }
    if (!(p.colsample_bytree > 0.0) || p.colsample_bytree > 1.0) {
        throw ParamError("gbt colsample_bytree must lie in (0, 1]");
    }
    if (p.l1_alpha < 0.0 || p.l2_lambda < 0.0 || p.min_split_gain < 0.0) {
        throw ParamError("gbt regularizers must be non-negative");
    }
}

struct BoostTreeBuilder {
    const Eigen::MatrixXd& X;
    const Eigen::VectorXd& g;
    const Eigen::VectorXd& h;
    const GbtParams& params;
    const std::vector<int>& features;
    std::vector<TreeNode> nodes;

    double leaf_score(double G, double H) const {
        const double t = shrink(G, params.l1_alpha);
        return t * t / (H + params.l2_lambda);
    }

    int build(std::vector<Eigen::Index>& rows, int depth) {
        double G = 0.0, H = 0.0;
        for (Eigen::Index r : rows) {
            G += g(r);
            H += h(r);
        }

        const int id = static_cast<int>(nodes.size());
        nodes.emplace_back();
        nodes[id].prob1 = -shrink(G, params.l1_alpha) / (H + params.l2_lambda);

        if (depth >= params.max_depth || rows.size() < 2) {
            return id;
        }

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_gain = 0.0;

        std::vector<std::pair<double, Eigen::Index>> vals;
        vals.reserve(rows.size());
        for (int j : features) {
            vals.clear();
            for (Eigen::Index r : rows) vals.emplace_back(X(r, j), r);
            std::sort(vals.begin(), vals.end());

            double GL = 0.0, HL = 0.0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                GL += g(vals[i].second);
                HL += h(vals[i].second);
                if (vals[i].first == vals[i + 1].first) continue;
                const double HR = H - HL;
                if (HL < params.min_child_weight || HR < params.min_child_weight) continue;
                const double gain = 0.5 * (leaf_score(GL, HL) + leaf_score(G - GL, HR) -
                                           leaf_score(G, H)) -
                                    params.min_split_gain;
                if (gain > best_gain + 1e-15) {
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
        nodes[id].left = build(left_rows, depth + 1);
        nodes[id].right = build(right_rows, depth + 1);
        return id;
    }
};

double tree_output(const std::vector<TreeNode>& nodes, const Eigen::VectorXd& x) {
    int id = 0;
    while (!nodes[id].is_leaf) {
        id = x(nodes[id].feature) <= nodes[id].threshold ? nodes[id].left : nodes[id].right;
    }
    return nodes[id].prob1;
}

double mean_log_loss(const Eigen::VectorXd& margin, const Eigen::VectorXd& y) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double m = margin(i);
        const double softplus = m > 0.0 ? m + std::log1p(std::exp(-m))
                                        : std::log1p(std::exp(m));
        acc += softplus - y(i) * m;
    }
    return acc / static_cast<double>(y.size());
}

}  // namespace

double GbtModel::raw_margin(const Eigen::VectorXd& x) const {
    double acc = 0.0;
    for (const auto& tree : trees_) {
        acc += params_.eta * tree_output(tree, x);
    }
    return acc;
}

GbtModel fit_gbt(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GbtParams& params) {
    validate(params);
    check_finite(X, y);
    const Eigen::Index n = X.rows();
    const int d = static_cast<int>(X.cols());
    if (n < 2) {
        throw InsufficientDataError("gbt needs at least two rows");
    }

    Eigen::VectorXd margin = Eigen::VectorXd::Zero(n);
    std::vector<std::vector<TreeNode>> trees;
    trees.reserve(static_cast<std::size_t>(params.n_rounds));
    std::vector<double> losses;
    losses.reserve(static_cast<std::size_t>(params.n_rounds) + 1);
    losses.push_back(mean_log_loss(margin, y));

    const auto n_rows_used = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(params.subsample * static_cast<double>(n))));
    const auto n_cols_used = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(params.colsample_bytree * d)));

    for (int round = 0; round < params.n_rounds; ++round) {
        Rng rng(derive_seed(params.seed, "gbt_round", static_cast<std::uint64_t>(round)));

        Eigen::VectorXd g(n), h(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = sigmoid(margin(i));
            g(i) = p - y(i);
            h(i) = std::max(p * (1.0 - p), 1e-16);
        }

        std::vector<Eigen::Index> rows;
        if (n_rows_used < static_cast<std::size_t>(n)) {
            auto picked = rng.sample_without_replacement(static_cast<std::size_t>(n), n_rows_used);
            rows.assign(picked.begin(), picked.end());
            std::sort(rows.begin(), rows.end());
        } else {
            rows.resize(static_cast<std::size_t>(n));
            for (Eigen::Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
        }

        std::vector<int> features;
        if (n_cols_used < static_cast<std::size_t>(d)) {
            auto picked = rng.sample_without_replacement(static_cast<std::size_t>(d), n_cols_used);
            features.assign(picked.begin(), picked.end());
            std::sort(features.begin(), features.end());
        } else {
            features.resize(static_cast<std::size_t>(d));
            for (int j = 0; j < d; ++j) features[static_cast<std::size_t>(j)] = j;
        }

        BoostTreeBuilder builder{X, g, h, params, features, {}};
        builder.build(rows, 0);

        for (Eigen::Index i = 0; i < n; ++i) {
            margin(i) += params.eta * tree_output(builder.nodes, X.row(i));
        }
        trees.push_back(std::move(builder.nodes));
        losses.push_back(mean_log_loss(margin, y));
    }

    return GbtModel(std::move(trees), params, std::move(losses));
}

}  // namespace dynabe::learners
