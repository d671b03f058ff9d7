#include "dynabe/svm.hpp"

#include "dynabe/errors.hpp"

#include <cmath>

namespace dynabe::learners {

namespace {

constexpr double kAlphaEps = 1e-12;

struct SmoState {
    const Eigen::MatrixXd& K;
    const Eigen::VectorXd& s;  // labels in {-1,+1}
    double C;
    double tol;
    Eigen::VectorXd alpha;
    Eigen::VectorXd f;  // current decision values per training row
    double b = 0.0;
    long steps = 0;

    bool at_bound(Eigen::Index i) const {
        return alpha(i) < kAlphaEps || alpha(i) > C - kAlphaEps;
    }
};

bool take_step(SmoState& st, Eigen::Index i1, Eigen::Index i2) {
    if (i1 == i2) return false;
    const double a1_old = st.alpha(i1);
    const double a2_old = st.alpha(i2);
    const double s1 = st.s(i1);
    const double s2 = st.s(i2);
    const double E1 = st.f(i1) - s1;
    const double E2 = st.f(i2) - s2;
    const double sgn = s1 * s2;

    double L, H;
    if (sgn < 0.0) {
        L = std::max(0.0, a2_old - a1_old);
        H = std::min(st.C, st.C + a2_old - a1_old);
    } else {
        L = std::max(0.0, a2_old + a1_old - st.C);
        H = std::min(st.C, a2_old + a1_old);
    }
    if (L >= H) return false;

    const double k11 = st.K(i1, i1);
    const double k12 = st.K(i1, i2);
    const double k22 = st.K(i2, i2);
    const double eta = k11 + k22 - 2.0 * k12;

    double a2;
    if (eta > 0.0) {
        a2 = a2_old + s2 * (E1 - E2) / eta;
        a2 = std::clamp(a2, L, H);
    } else {
        // flat or concave direction: evaluate the objective at both clip ends
        const double f1 = s1 * (E1 + st.b) - a1_old * k11 - sgn * a2_old * k12;
        const double f2 = s2 * (E2 + st.b) - sgn * a1_old * k12 - a2_old * k22;
        const double L1 = a1_old + sgn * (a2_old - L);
        const double H1 = a1_old + sgn * (a2_old - H);
        const double obj_l = L1 * f1 + L * f2 + 0.5 * L1 * L1 * k11 +
                             0.5 * L * L * k22 + sgn * L * L1 * k12;
        const double obj_h = H1 * f1 + H * f2 + 0.5 * H1 * H1 * k11 +
                             0.5 * H * H * k22 + sgn * H * H1 * k12;
        if (obj_l < obj_h - kAlphaEps) {
            a2 = L;
        } else if (obj_l > obj_h + kAlphaEps) {
            a2 = H;
        } else {
            return false;
        }
    }
    if (std::abs(a2 - a2_old) < kAlphaEps * (a2 + a2_old + kAlphaEps)) {
        return false;
    }
    double a1 = a1_old + sgn * (a2_old - a2);
    // The pair update keeps both multipliers inside [0, C] exactly in real
    // arithmetic; round-off can leak a hair past a bound, so snap it back.
    if (a1 < kAlphaEps) a1 = 0.0;
    if (a1 > st.C - kAlphaEps) a1 = st.C;

    const double d1 = (a1 - a1_old) * s1;
    const double d2 = (a2 - a2_old) * s2;
    const double b1 = -(E1 + d1 * k11 + d2 * k12);
    const double b2 = -(E2 + d1 * k12 + d2 * k22);
    double delta_b;
    if (a1 > kAlphaEps && a1 < st.C - kAlphaEps) {
        delta_b = b1;
    } else if (a2 > kAlphaEps && a2 < st.C - kAlphaEps) {
        delta_b = b2;
    } else {
        delta_b = 0.5 * (b1 + b2);
    }

    st.f += d1 * st.K.col(i1) + d2 * st.K.col(i2);
    st.f.array() += delta_b;
    st.b += delta_b;
    st.alpha(i1) = a1;
    st.alpha(i2) = a2;
    ++st.steps;
    return true;
}

bool examine_example(SmoState& st, Eigen::Index i2) {
    const Eigen::Index n = st.alpha.size();
    const double s2 = st.s(i2);
    const double E2 = st.f(i2) - s2;
    const double r2 = E2 * s2;
    const bool violates = (r2 < -st.tol && st.alpha(i2) < st.C - kAlphaEps) ||
                          (r2 > st.tol && st.alpha(i2) > kAlphaEps);
    if (!violates) return false;

    // first choice: the non-bound point with the largest |E1 - E2|
    Eigen::Index best = -1;
    double best_gap = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (st.at_bound(i)) continue;
        const double gap = std::abs(st.f(i) - st.s(i) - E2);
        if (gap > best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    if (best >= 0 && take_step(st, best, i2)) return true;

    for (Eigen::Index i = 0; i < n; ++i) {
        if (st.at_bound(i)) continue;
        if (take_step(st, i, i2)) return true;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (take_step(st, i, i2)) return true;
    }
    return false;
}

double max_kkt_violation(const SmoState& st) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < st.alpha.size(); ++i) {
        const double v = st.s(i) * st.f(i);
        double viol;
        if (st.alpha(i) < kAlphaEps) {
            viol = std::max(0.0, 1.0 - v);
        } else if (st.alpha(i) > st.C - kAlphaEps) {
            viol = std::max(0.0, v - 1.0);
        } else {
            viol = std::abs(v - 1.0);
        }
        worst = std::max(worst, viol);
    }
    return worst;
}

}  // namespace

double SvmRbfModel::score(const Eigen::VectorXd& x) const {
    double acc = bias_;
    for (Eigen::Index i = 0; i < support_vectors_.rows(); ++i) {
        const double dist_sq = (support_vectors_.row(i).transpose() - x).squaredNorm();
        acc += sv_coef_(i) * std::exp(-params_.gamma * dist_sq);
    }
    return acc;
}

SvmRbfModel fit_svm_rbf(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const SvmParams& params) {
    if (!(params.C > 0.0) || !std::isfinite(params.C)) {
        throw ParamError("svm C must be finite and positive");
    }
    if (!(params.gamma > 0.0) || !std::isfinite(params.gamma)) {
        throw ParamError("svm gamma must be finite and positive");
    }
    check_finite(X, y);
    const Eigen::Index n = X.rows();
    if (n < 2) {
        throw InsufficientDataError("svm needs at least two rows");
    }
    if (!has_both_classes(y)) {
        throw DegenerateTargetError("svm needs both classes in y");
    }

    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) s(i) = y(i) > 0.5 ? 1.0 : -1.0;

    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dist_sq = (X.row(i) - X.row(j)).squaredNorm();
            const double k = std::exp(-params.gamma * dist_sq);
            K(i, j) = k;
            K(j, i) = k;
        }
    }

    SmoState st{K, s, params.C, params.kkt_tol,
                Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};

    long changed = 0;
    bool examine_all = true;
    while (changed > 0 || examine_all) {
        changed = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (examine_all || !st.at_bound(i)) {
                changed += examine_example(st, i) ? 1 : 0;
            }
            if (st.steps > params.max_steps) {
                throw ConvergenceError("svm optimizer exceeded its step budget",
                                       max_kkt_violation(st));
            }
        }
        if (examine_all) {
            examine_all = false;
        } else if (changed == 0) {
            examine_all = true;
        }
    }

    const double residual = max_kkt_violation(st);
    const Eigen::VectorXd coef_all = st.alpha.cwiseProduct(s);
    const double dual = st.alpha.sum() - 0.5 * coef_all.dot(K * coef_all);

    std::vector<Eigen::Index> sv_rows;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (st.alpha(i) > kAlphaEps) sv_rows.push_back(i);
    }
    Eigen::MatrixXd sv(static_cast<Eigen::Index>(sv_rows.size()), X.cols());
    Eigen::VectorXd coef(static_cast<Eigen::Index>(sv_rows.size()));
    for (std::size_t r = 0; r < sv_rows.size(); ++r) {
        sv.row(static_cast<Eigen::Index>(r)) = X.row(sv_rows[r]);
        coef(static_cast<Eigen::Index>(r)) = coef_all(sv_rows[r]);
    }

    return SvmRbfModel(std::move(sv), std::move(coef), st.b, params, st.alpha,
                       residual, dual);
}

}  // namespace dynabe::learners
