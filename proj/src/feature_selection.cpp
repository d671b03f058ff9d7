#include "dynabe/feature_selection.hpp"

#include "dynabe/errors.hpp"
#include "dynabe/io.hpp"
#include "dynabe/predictor.hpp"
#include "dynabe/rng.hpp"
#include "dynabe/stats.hpp"
#include "dynabe/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace dynabe::selection {

namespace {

/// Sorts (name, score) by descending score, ties by name, and assigns 1..n.
FeatureRanking build_ranking(RankMethod method,
                             std::vector<std::pair<std::string, double>> scored) {
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    FeatureRanking out;
    out.method = method;
    out.entries.reserve(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
        out.entries.push_back({scored[i].first, i + 1, scored[i].second});
    }
    return out;
}

void check_shapes(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                  const Eigen::VectorXd& y) {
    if (static_cast<std::size_t>(X.cols()) != names.size()) {
        throw SchemaError("feature names do not match matrix columns");
    }
    if (X.rows() != y.size()) {
        throw ParamError("rows of X and y differ");
    }
    if (X.cols() < 1) {
        throw InsufficientDataError("no features to rank");
    }
}

}  // namespace

std::string to_string(RankMethod method) {
    switch (method) {
        case RankMethod::kR2: return "r2";
        case RankMethod::kReliefF: return "relieff";
        case RankMethod::kRfImportance: return "rf_importance";
        case RankMethod::kCombined: return "combined";
    }
    throw ParamError("unknown ranking method");
}

std::size_t FeatureRanking::rank_of(const std::string& feature) const {
    for (const auto& e : entries) {
        if (e.feature == feature) return e.rank;
    }
    throw SchemaError("feature '" + feature + "' absent from ranking");
}

double FeatureRanking::score_of(const std::string& feature) const {
    for (const auto& e : entries) {
        if (e.feature == feature) return e.score;
    }
    throw SchemaError("feature '" + feature + "' absent from ranking");
}

std::vector<std::size_t> pvalue_filter(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       double threshold) {
    if (X.rows() < 3) {
        throw InsufficientDataError("p-value filter needs at least three rows");
    }
    if (y.size() != X.rows()) {
        throw ParamError("rows of X and y differ");
    }
    if (y.minCoeff() == y.maxCoeff()) {
        throw DegenerateTargetError("labels are constant; filter p-values undefined");
    }

    std::vector<std::size_t> keep;
    std::vector<double> col(static_cast<std::size_t>(X.rows()));
    std::vector<double> target(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) target[static_cast<std::size_t>(i)] = y(i);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) col[static_cast<std::size_t>(i)] = X(i, j);
        const auto fit = univariate_regression(col.data(), target.data(), col.size());
        if (fit.p_value <= threshold) {
            keep.push_back(static_cast<std::size_t>(j));
        }
    }
    return keep;
}

FeatureRanking r2_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                       const Eigen::VectorXd& y) {
    check_shapes(X, names, y);
    std::vector<std::pair<std::string, double>> scored;
    std::vector<double> col(static_cast<std::size_t>(X.rows()));
    std::vector<double> target(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) target[static_cast<std::size_t>(i)] = y(i);
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) col[static_cast<std::size_t>(i)] = X(i, j);
        const auto fit = univariate_regression(col.data(), target.data(), col.size());
        scored.emplace_back(names[static_cast<std::size_t>(j)], fit.r_squared);
    }
    return build_ranking(RankMethod::kR2, std::move(scored));
}

FeatureRanking relieff_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                            const Eigen::VectorXd& y, std::size_t k_neighbors,
                            std::size_t n_iterations) {
    check_shapes(X, names, y);
    if (k_neighbors < 1) {
        throw ParamError("relieff needs k_neighbors >= 1");
    }
    if (!learners::has_both_classes(y)) {
        throw DegenerateTargetError("relieff needs both classes present");
    }
    const auto n = static_cast<std::size_t>(X.rows());
    const auto d = static_cast<std::size_t>(X.cols());
    const std::size_t m = n_iterations == 0 ? n : n_iterations;

    Eigen::VectorXd range(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        range(j) = X.col(j).maxCoeff() - X.col(j).minCoeff();
    }

    Eigen::VectorXd weights = Eigen::VectorXd::Zero(X.cols());
    std::vector<std::pair<double, std::size_t>> hits, misses;
    for (std::size_t it = 0; it < m; ++it) {
        const auto i = static_cast<Eigen::Index>(it % n);
        hits.clear();
        misses.clear();
        for (Eigen::Index o = 0; o < X.rows(); ++o) {
            if (o == i) continue;
            const double dist = (X.row(i) - X.row(o)).cwiseAbs().sum();
            auto& bucket = y(o) == y(i) ? hits : misses;
            bucket.emplace_back(dist, static_cast<std::size_t>(o));
        }
        std::sort(hits.begin(), hits.end());
        std::sort(misses.begin(), misses.end());
        const std::size_t kh = std::min(k_neighbors, hits.size());
        const std::size_t km = std::min(k_neighbors, misses.size());

        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            if (range(j) == 0.0) continue;
            double hit_diff = 0.0, miss_diff = 0.0;
            for (std::size_t k = 0; k < kh; ++k) {
                hit_diff += std::abs(X(i, j) - X(static_cast<Eigen::Index>(hits[k].second), j));
            }
            for (std::size_t k = 0; k < km; ++k) {
                miss_diff += std::abs(X(i, j) - X(static_cast<Eigen::Index>(misses[k].second), j));
            }
            double delta = 0.0;
            if (km > 0) delta += miss_diff / (static_cast<double>(km) * range(j));
            if (kh > 0) delta -= hit_diff / (static_cast<double>(kh) * range(j));
            weights(j) += delta / static_cast<double>(m);
        }
    }

    std::vector<std::pair<std::string, double>> scored;
    for (std::size_t j = 0; j < d; ++j) {
        scored.emplace_back(names[j], weights(static_cast<Eigen::Index>(j)));
    }
    return build_ranking(RankMethod::kReliefF, std::move(scored));
}

FeatureRanking rf_importance_rank(const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                                  const Eigen::VectorXd& y, int n_trees, std::uint64_t seed) {
    check_shapes(X, names, y);
    if (X.rows() < 10) {
        throw InsufficientDataError("permutation importance needs at least ten rows");
    }
    if (!learners::has_both_classes(y)) {
        throw DegenerateTargetError("permutation importance needs both classes");
    }

    learners::RandomForestParams params;
    params.n_trees = n_trees;
    params.seed = derive_seed(seed, "importance_forest");
    const auto forest = learners::fit_random_forest(X, y, params);

    const auto d = static_cast<std::size_t>(X.cols());
    Eigen::VectorXd importance = Eigen::VectorXd::Zero(X.cols());
    std::size_t trees_used = 0;

    for (std::size_t t = 0; t < forest.trees().size(); ++t) {
        const auto& oob = forest.oob_rows()[t];
        if (oob.empty()) continue;
        ++trees_used;
        const auto& tree = forest.trees()[t];

        double base_correct = 0.0;
        for (const auto r : oob) {
            base_correct += tree.classify(X.row(r)) == (y(r) > 0.5 ? 1 : 0) ? 1.0 : 0.0;
        }
        const double base_acc = base_correct / static_cast<double>(oob.size());

        for (std::size_t j = 0; j < d; ++j) {
            std::vector<std::size_t> perm(oob.size());
            for (std::size_t k = 0; k < oob.size(); ++k) perm[k] = k;
            Rng rng(derive_seed(seed, "importance_perm",
                                static_cast<std::uint64_t>(t) * d + j));
            rng.shuffle(perm);

            double correct = 0.0;
            Eigen::VectorXd probe;
            for (std::size_t k = 0; k < oob.size(); ++k) {
                probe = X.row(oob[k]);
                probe(static_cast<Eigen::Index>(j)) = X(oob[perm[k]], static_cast<Eigen::Index>(j));
                correct += tree.classify(probe) == (y(oob[k]) > 0.5 ? 1 : 0) ? 1.0 : 0.0;
            }
            importance(static_cast<Eigen::Index>(j)) +=
                base_acc - correct / static_cast<double>(oob.size());
        }
    }
    if (trees_used == 0) {
        throw InsufficientDataError("no tree had out-of-bag rows; cannot score importance");
    }
    importance /= static_cast<double>(trees_used);

    std::vector<std::pair<std::string, double>> scored;
    for (std::size_t j = 0; j < d; ++j) {
        scored.emplace_back(names[j], importance(static_cast<Eigen::Index>(j)));
    }
    return build_ranking(RankMethod::kRfImportance, std::move(scored));
}

FeatureRanking combine_rankings(const std::vector<FeatureRanking>& rankings) {
    if (rankings.empty()) {
        throw ParamError("no rankings to combine");
    }
    std::map<std::string, double> total;
    for (const auto& e : rankings.front().entries) {
        total[e.feature] = 0.0;
    }
    for (const auto& ranking : rankings) {
        if (ranking.entries.size() != total.size()) {
            throw SchemaError("rankings cover different feature sets");
        }
        for (const auto& e : ranking.entries) {
            const auto it = total.find(e.feature);
            if (it == total.end()) {
                throw SchemaError("rankings cover different feature sets");
            }
            it->second += static_cast<double>(e.rank) / static_cast<double>(rankings.size());
        }
    }

    std::vector<std::pair<std::string, double>> scored(total.begin(), total.end());
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second < b.second;  // lower mean rank wins
        return a.first < b.first;
    });
    FeatureRanking out;
    out.method = RankMethod::kCombined;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        out.entries.push_back({scored[i].first, i + 1, scored[i].second});
    }
    return out;
}

std::vector<std::string> select_top(const FeatureRanking& combined, double keep_fraction) {
    if (!(keep_fraction > 0.0) || keep_fraction > 1.0) {
        throw ParamError("keep_fraction must lie in (0, 1]");
    }
    const auto n = combined.entries.size();
    if (n == 0) {
        throw InsufficientDataError("empty ranking");
    }
    const auto keep = static_cast<std::size_t>(
        std::ceil(keep_fraction * static_cast<double>(n)));
    std::vector<std::string> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        out.push_back(combined.entries[i].feature);
    }
    return out;
}

std::vector<std::string> combine_and_select(const std::vector<FeatureRanking>& rankings,
                                            double keep_fraction) {
    return select_top(combine_rankings(rankings), keep_fraction);
}

SelectionResult run_hybrid_selection(const Eigen::MatrixXd& X,
                                     const std::vector<std::string>& names,
                                     const Eigen::VectorXd& y, double keep_fraction,
                                     std::uint64_t seed, double p_threshold,
                                     std::size_t k_neighbors, int n_trees) {
    check_shapes(X, names, y);
    SelectionResult result;

    const auto kept = pvalue_filter(X, y, p_threshold);
    if (kept.empty()) {
        throw InsufficientDataError("no features survive the p-value filter");
    }

    Eigen::MatrixXd Xf(X.rows(), static_cast<Eigen::Index>(kept.size()));
    std::vector<double> col(static_cast<std::size_t>(X.rows()));
    std::vector<double> target(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) target[static_cast<std::size_t>(i)] = y(i);
    for (std::size_t j = 0; j < kept.size(); ++j) {
        Xf.col(static_cast<Eigen::Index>(j)) = X.col(static_cast<Eigen::Index>(kept[j]));
        result.filtered.push_back(names[kept[j]]);
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            col[static_cast<std::size_t>(i)] = X(i, static_cast<Eigen::Index>(kept[j]));
        }
        result.p_values.push_back(
            univariate_regression(col.data(), target.data(), col.size()).p_value);
    }

    result.r2 = r2_rank(Xf, result.filtered, y);
    result.relieff = relieff_rank(Xf, result.filtered, y, k_neighbors);
    result.rf_importance =
        rf_importance_rank(Xf, result.filtered, y, n_trees, derive_seed(seed, "selection"));
    result.combined = combine_rankings({result.r2, result.relieff, result.rf_importance});
    result.selected = select_top(result.combined, keep_fraction);
    return result;
}

std::vector<std::string> selection_report_header() {
    return {"feature", "p_value", "r2_rank", "relieff_rank", "rf_importance_rank",
            "combined_rank", "selected"};
}

std::vector<std::vector<std::string>> selection_report_rows(const SelectionResult& result) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : result.combined.entries) {
        std::size_t fi = 0;
        while (fi < result.filtered.size() && result.filtered[fi] != e.feature) ++fi;
        const bool selected =
            std::find(result.selected.begin(), result.selected.end(), e.feature) !=
            result.selected.end();
        rows.push_back({e.feature, format_double(result.p_values[fi]),
                        std::to_string(result.r2.rank_of(e.feature)),
                        std::to_string(result.relieff.rank_of(e.feature)),
                        std::to_string(result.rf_importance.rank_of(e.feature)),
                        std::to_string(e.rank), selected ? "1" : "0"});
    }
    return rows;
}

}  // namespace dynabe::selection
