// Small numeric helpers: chi-square p-values via the regularized incomplete
// gamma function, medians, and least-squares line fits for the scaling sweep.
#pragma once

#include <cstdint>
#include <vector>

namespace clfree {

// Regularized upper incomplete gamma Q(a, x); series/continued-fraction.
double igamma_q(double a, double x);

// P[Chi2_df >= stat]
double chi_square_pvalue(double stat, std::uint32_t df);

// Chi-square statistic for observed counts against uniform expectation.
double chi_square_uniform_stat(const std::vector<std::uint64_t>& observed);

double median(std::vector<double> values);

struct LineFit {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace clfree
