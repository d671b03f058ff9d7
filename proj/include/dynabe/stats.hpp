#pragma once

#include <cstddef>
#include <vector>

namespace dynabe {

/// Regularized incomplete beta function I_x(a, b), evaluated by the Lentz
/// continued fraction. Accurate to ~1e-14 for the argument ranges we use.
double incomplete_beta(double a, double b, double x);

/// CDF of Student's t distribution with nu degrees of freedom.
double student_t_cdf(double t, double nu);

/// Two-sided p-value of a t statistic with nu degrees of freedom.
double two_sided_t_pvalue(double t, double nu);

struct UnivariateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;   // 0 for a zero-variance predictor
    double p_value = 1.0;     // two-sided, slope t-test; 1 when undefined
};

/// Ordinary least squares of y on a single predictor (with intercept),
/// plus the slope's exact-t two-sided p-value and R^2.
UnivariateFit univariate_regression(const double* x, const double* y,
                                    std::size_t n);

inline UnivariateFit univariate_regression(const std::vector<double>& x,
                                           const std::vector<double>& y) {
    return univariate_regression(x.data(), y.data(), x.size());
}

}  // namespace dynabe
