#pragma once

#include <span>
#include <vector>

namespace attnedit {

/// Ranks starting at 1; tied values share the mean of their ranks.
std::vector<double> average_ranks(std::span<const double> x);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of average ranks.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

/// Fraction of `population` that is <= value.
double percentile_of(double value, std::span<const double> population);

}  // namespace attnedit
