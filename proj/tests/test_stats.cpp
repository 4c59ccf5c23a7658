#include <cmath>

#include "doctest.h"

#include "dspace/stats.hpp"

using namespace dspace;
namespace ds = dspace::stats;

TEST_CASE("mean median stddev") {
    CHECK(ds::mean({1, 2, 3, 4}) == doctest::Approx(2.5));
    CHECK(ds::median({3, 1, 2}) == doctest::Approx(2.0));
    CHECK(ds::median({4, 1, 3, 2}) == doctest::Approx(2.5));
    CHECK(ds::sample_stddev({2, 4, 4, 4, 5, 5, 7, 9}) == doctest::Approx(std::sqrt(32.0 / 7.0)));
    CHECK(ds::sample_stddev({5}) == 0.0);
}

TEST_CASE("linear fit matches the closed-form oracle") {
    // Independent oracle: scipy.stats.linregress on the same fixture.
    ds::LinearFit fit = ds::linear_fit({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5});
    CHECK(fit.n == 5);
    CHECK(fit.slope == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(fit.r == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(fit.p == doctest::Approx(0.10408803866182778).epsilon(1e-10));
    CHECK(fit.predict(10.0) == doctest::Approx(8.6));
}

TEST_CASE("linear fit edge cases") {
    CHECK_THROWS_AS(ds::linear_fit({1, 2}, {1, 2}), InsufficientDataError);
    CHECK_THROWS_AS(ds::linear_fit({1, 2, 3}, {1, 2}), InsufficientDataError);
    CHECK_THROWS_AS(ds::linear_fit({1, 1, 1}, {1, 2, 3}), DegenerateDataError);
    CHECK_THROWS_AS(ds::linear_fit({1, 2, std::nan("")}, {1, 2, 3}), DegenerateDataError);

    SUBCASE("constant response is a defined degenerate case") {
        ds::LinearFit fit = ds::linear_fit({1, 2, 3, 4}, {7, 7, 7, 7});
        CHECK(fit.slope == 0.0);
        CHECK(fit.intercept == doctest::Approx(7.0));
        CHECK(fit.r == 0.0);
        CHECK(fit.p == 1.0);
    }
    SUBCASE("perfect fit pins r and p") {
        ds::LinearFit fit = ds::linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
        CHECK(fit.slope == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(fit.intercept == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(fit.r == doctest::Approx(1.0));
        CHECK(fit.p == 0.0);
    }
    SUBCASE("perfect negative fit") {
        ds::LinearFit fit = ds::linear_fit({1, 2, 3}, {9, 7, 5});
        CHECK(fit.r == doctest::Approx(-1.0));
        CHECK(fit.p == 0.0);
    }
}

TEST_CASE("student t two-sided tail oracle values") {
    // Independent oracle: mpmath regularized incomplete beta at 30 digits.
    CHECK(ds::student_t_two_sided_p(2.0, 3) == doctest::Approx(0.13932596855884318).epsilon(1e-12));
    CHECK(ds::student_t_two_sided_p(0.5, 1) == doctest::Approx(0.70483276469913345).epsilon(1e-12));
    CHECK(ds::student_t_two_sided_p(4.25, 7) ==
          doctest::Approx(0.003793131227495847).epsilon(1e-10));
    CHECK(ds::student_t_two_sided_p(1.2345, 30) ==
          doctest::Approx(0.22659939364044624).epsilon(1e-12));
    CHECK(ds::student_t_two_sided_p(10.0, 2) ==
          doctest::Approx(0.0098524570233256908).epsilon(1e-10));
    CHECK(ds::student_t_two_sided_p(-2.0, 3) == doctest::Approx(0.13932596855884318).epsilon(1e-12));
    CHECK(ds::student_t_two_sided_p(0.0, 5) == doctest::Approx(1.0));
}

TEST_CASE("regularized incomplete beta oracle values") {
    CHECK(ds::regularized_incomplete_beta(2, 3, 0.5) == doctest::Approx(0.6875).epsilon(1e-12));
    CHECK(ds::regularized_incomplete_beta(5, 2, 0.3) ==
          doctest::Approx(0.010934999999999998).epsilon(1e-10));
    CHECK(ds::regularized_incomplete_beta(0.5, 0.5, 0.9) ==
          doctest::Approx(0.79516723530086657).epsilon(1e-10));
    CHECK(ds::regularized_incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(ds::regularized_incomplete_beta(2, 3, 1.0) == 1.0);

    SUBCASE("complement identity holds across the split point") {
        for (double x : {0.05, 0.2, 0.45, 0.55, 0.8, 0.95}) {
            double lhs = ds::regularized_incomplete_beta(2.5, 4.0, x);
            double rhs = 1.0 - ds::regularized_incomplete_beta(4.0, 2.5, 1.0 - x);
            CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
        }
    }
}

TEST_CASE("normal density and distribution") {
    CHECK(ds::normal_cdf(1.96) == doctest::Approx(0.97500210485177956).epsilon(1e-12));
    CHECK(ds::normal_cdf(0.0) == doctest::Approx(0.5));
    CHECK(ds::normal_pdf(0.5) == doctest::Approx(0.35206532676429948).epsilon(1e-12));
    CHECK(ds::normal_cdf(-1.0) == doctest::Approx(1.0 - ds::normal_cdf(1.0)).epsilon(1e-13));
}
