#pragma once

#include <vector>

namespace mgarch {

/// Standard normal CDF.
double normal_cdf(double x);

/// Two-sided p-value of a standard normal z statistic.
double normal_two_sided_p(double z);

/// Upper tail probability P(X > x) for X ~ chi-squared with df degrees of
/// freedom (df >= 1). Uses the closed Poisson sum for even df and the
/// half-integer recurrence starting from erfc for odd df.
double chi2_sf(double x, int df);

/// Empirical quantile with linear interpolation between order statistics
/// (the common "type 7" convention). Input need not be sorted.
double quantile_type7(std::vector<double> v, double p);

double mean(const std::vector<double>& v);

/// Sample standard deviation (denominator n-1).
double stddev(const std::vector<double>& v);

}  // namespace mgarch
