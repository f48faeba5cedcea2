#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace gdnm {

double normal_cdf(double x);
double normal_quantile(double prob);

struct Interval {
    double low = 0.0;
    double high = 1.0;
};

/// Wilson score interval for a binomial proportion at two-sided `confidence`.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence = 0.99);

/// Dvoretzky-Kiefer-Wolfowitz half-width for an empirical CDF of n samples.
double dkw_halfwidth(std::uint64_t n, double confidence = 0.99);

/// sup_x |F_n(x) - Phi(x / scale)| for the sample; scale == 0 compares with
/// a point mass at 0. The sample is sorted in place.
double ks_distance_normal(std::vector<double>& sample, double scale);

/// Two-sample Kolmogorov-Smirnov statistic. Both samples are sorted in place.
double ks_distance_two_sample(std::vector<double>& a, std::vector<double>& b);

struct MeanEstimate {
    double mean = 0.0;
    double stddev = 0.0; ///< sample standard deviation
    double stderr_ = 0.0;
};

MeanEstimate mean_estimate(std::span<const double> values);

} // namespace gdnm
