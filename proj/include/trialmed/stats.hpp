#pragma once

#include <span>

namespace trialmed::stats {

/// Standard normal inverse CDF; p in (0, 1).
double normal_quantile(double p);

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double sample_sd(std::span<const double> x);
/// Empirical quantile with linear interpolation between order statistics
/// (Hyndman-Fan type 7). `sorted` must be ascending and non-empty.
double quantile_sorted(std::span<const double> sorted, double prob);

}  // namespace trialmed::stats
