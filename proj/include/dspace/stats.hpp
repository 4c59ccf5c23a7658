#pragma once

#include <cstddef>
#include <vector>

#include "dspace/errors.hpp"

namespace dspace::stats {

double mean(const std::vector<double>& xs);

// Median over a copy; even-length input averages the middle pair.
double median(std::vector<double> xs);

// Sample standard deviation (n - 1 denominator); 0 for n < 2.
double sample_stddev(const std::vector<double>& xs);

// Ordinary least-squares line with the Pearson correlation of the fit and the
// two-sided p-value of the zero-slope null hypothesis (t = r*sqrt(n-2)/
// sqrt(1-r^2), df = n-2). Constant y is a defined degenerate case: slope 0,
// r = 0, p = 1.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r = 0.0;
    double p = 1.0;
    std::size_t n = 0;

    double predict(double x) const { return slope * x + intercept; }
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Regularized incomplete beta function I_x(a, b), evaluated with a Lentz
// continued fraction; accurate to around 1e-12 on the tested range.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t distribution.
double student_t_two_sided_p(double t, double df);

// Standard normal density and distribution function.
double normal_pdf(double z);
double normal_cdf(double z);

}  // namespace dspace::stats
