#pragma once

#include <span>
#include <vector>

namespace meshprox::stats {

double mean(std::span<const double> xs);

// Median with the usual midpoint rule for even counts. Returns 0 on empty.
double median(std::span<const double> xs);

// Linear-interpolation quantile of sorted-or-not data, p in [0, 1].
double quantile(std::span<const double> xs, double p);

double pearson(std::span<const double> xs, std::span<const double> ys);

// Rank correlation with average ranks for ties.
double spearman(std::span<const double> xs, std::span<const double> ys);

// Average ranks (1-based), ties share the mean of their rank span.
std::vector<double> ranks(std::span<const double> xs);

}  // namespace meshprox::stats
