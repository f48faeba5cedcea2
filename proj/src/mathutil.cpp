#include "gdnm/mathutil.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>

namespace gdnm {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw std::invalid_argument("normal_quantile: prob must lie in (0,1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double confidence) {
    if (trials == 0) return {0.0, 1.0};
    if (successes > trials) throw std::invalid_argument("wilson_interval: successes > trials");
    const double z = normal_quantile(0.5 + 0.5 * confidence);
    const double n = double(trials);
    const double phat = double(successes) / n;
    const double z2 = z * z;
    const double centre = (phat + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    Interval out{std::max(0.0, centre - half), std::min(1.0, centre + half)};
    // Guard against rounding pushing the point estimate outside.
    out.low = std::min(out.low, phat);
    out.high = std::max(out.high, phat);
    return out;
}

double dkw_halfwidth(std::uint64_t n, double confidence) {
    if (n == 0) return 1.0;
    return std::sqrt(std::log(2.0 / (1.0 - confidence)) / (2.0 * double(n)));
}

double ks_distance_normal(std::vector<double>& sample, double scale) {
    if (sample.empty()) return 0.0;
    std::sort(sample.begin(), sample.end());
    const double n = double(sample.size());
    if (scale == 0.0) {
        // Point mass at 0: the sup is attained just below 0 or at 0.
        const auto below = std::lower_bound(sample.begin(), sample.end(), 0.0) - sample.begin();
        const auto upto = std::upper_bound(sample.begin(), sample.end(), 0.0) - sample.begin();
        return std::max(double(below) / n, 1.0 - double(upto) / n);
    }
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = normal_cdf(sample[i] / scale);
        d = std::max(d, std::max(double(i + 1) / n - f, f - double(i) / n));
    }
    return d;
}

double ks_distance_two_sample(std::vector<double>& a, std::vector<double>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = double(a.size());
    const double nb = double(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    return d;
}

MeanEstimate mean_estimate(std::span<const double> values) {
    MeanEstimate out;
    if (values.empty()) return out;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= double(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    out.mean = mean;
    out.stddev = values.size() > 1 ? std::sqrt(ss / double(values.size() - 1)) : 0.0;
    out.stderr_ = out.stddev / std::sqrt(double(values.size()));
    return out;
}

} // namespace gdnm
