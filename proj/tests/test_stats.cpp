#include <doctest.h>

#include "dynabe/errors.hpp"
#include "dynabe/stats.hpp"

#include <cmath>
#include <vector>

using namespace dynabe;

TEST_CASE("two sided t p-values match reference tables") {
    CHECK(two_sided_t_pvalue(2.0, 10) == doctest::Approx(0.07338803477074039).epsilon(1e-10));
    CHECK(two_sided_t_pvalue(1.0, 3) == doctest::Approx(0.39100221895577053).epsilon(1e-10));
    CHECK(two_sided_t_pvalue(0.5, 30) == doctest::Approx(0.6207230048851273).epsilon(1e-10));
    CHECK(two_sided_t_pvalue(3.5, 7) == doctest::Approx(0.009993040881885544).epsilon(1e-10));
    CHECK(two_sided_t_pvalue(0.0, 5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(two_sided_t_pvalue(-2.0, 10) == doctest::Approx(two_sided_t_pvalue(2.0, 10)));
}

TEST_CASE("p-values shrink as the statistic grows") {
    double prev = 1.1;
    for (double t = 0.0; t <= 6.0; t += 0.25) {
        const double p = two_sided_t_pvalue(t, 12);
        CHECK(p <= prev + 1e-15);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        prev = p;
    }
}

TEST_CASE("incomplete beta endpoints and symmetry") {
    CHECK(incomplete_beta(2.5, 3.5, 0.0) == 0.0);
    CHECK(incomplete_beta(2.5, 3.5, 1.0) == 1.0);
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double lhs = incomplete_beta(2.0, 5.0, x);
        const double rhs = 1.0 - incomplete_beta(5.0, 2.0, 1.0 - x);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
    CHECK(incomplete_beta(0.5, 0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("univariate regression reproduces a reference fit") {
    const std::vector<double> x = {0.2, 1.1, 1.9, 3.2, 4.1, 4.8, 6.3, 7.0};
    const std::vector<double> y = {1.1, 0.7, 2.3, 2.0, 3.9, 3.1, 4.4, 5.2};
    const auto fit = univariate_regression(x, y);
    CHECK(fit.slope == doctest::Approx(0.6183717840318879).epsilon(1e-10));
    CHECK(fit.intercept == doctest::Approx(0.6268208720860016).epsilon(1e-10));
    CHECK(fit.r_squared == doctest::Approx(0.8893192916219536).epsilon(1e-10));
    CHECK(fit.p_value == doctest::Approx(0.0004425590402545636).epsilon(1e-8));
}

TEST_CASE("perfect and flat relationships hit their limits") {
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    const std::vector<double> line = {2.0, 4.0, 6.0, 8.0};
    const auto perfect = univariate_regression(x, line);
    CHECK(perfect.r_squared == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(perfect.p_value == doctest::Approx(0.0).epsilon(1e-12));

    const std::vector<double> flat = {3.0, 3.0, 3.0, 3.0};
    const auto none = univariate_regression(x, flat);
    CHECK(none.slope == 0.0);
    CHECK(none.r_squared == 0.0);
    CHECK(none.p_value == 1.0);

    const std::vector<double> constant_x = {5.0, 5.0, 5.0, 5.0};
    const auto degenerate = univariate_regression(constant_x, line);
    CHECK(degenerate.slope == 0.0);
    CHECK(degenerate.p_value == 1.0);
}

TEST_CASE("regression needs at least three points") {
    CHECK_THROWS_AS(univariate_regression({1.0, 2.0}, {1.0, 2.0}), InsufficientDataError);
}
