#pragma once

#include "gdnm/env.hpp"

#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

namespace testing {

inline gdnm::ModelParams make_params(double p, std::vector<std::pair<int, double>> q, std::uint64_t seed = 1) {
    gdnm::ModelParams m;
    m.p = p;
    m.q = std::move(q);
    m.seed = seed;
    return m;
}

/// Environment with a fixed open set in the row above z.t = 0, given
/// relative to x = 0, and constant coin and rank.
struct FixedEnv {
    std::set<std::int64_t> open;
    bool coin = false;
    int rank = 1;

    bool omega(gdnm::Site z) const { return z.t == 1 && open.contains(z.x); }
    bool theta(gdnm::Site) const { return coin; }
    int zeta(gdnm::Site) const { return rank; }
};

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double n = double(a.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

/// Three-sigma binomial half-width.
inline double three_sigma(double p, double n) { return 3.0 * std::sqrt(p * (1.0 - p) / n); }

} // namespace testing
