#ifndef DPCA_STATS_HPP
#define DPCA_STATS_HPP

#include <span>
#include <vector>

namespace dpca {

double mean(std::span<const double> v);
double sample_sd(std::span<const double> v);

// Midpoint convention for even counts.
double median(std::vector<double> v);

// R type-7 quantile on an already sorted vector, q in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double q);

// Pearson correlation; returns NaN when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

double normal_cdf(double z);

// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);

double chi2_cdf(double x, double dof);

// Inverse chi-square CDF; prob >= 1 returns +infinity.
double chi2_quantile(double prob, double dof);

} // namespace dpca

#endif
