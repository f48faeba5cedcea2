#include "gdnm/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gdnm {

void throw_scan_limit(Site z, int k, std::int64_t max_radius) {
    throw ScanLimitError("no open site of rank " + std::to_string(k) + " above (" + std::to_string(z.x) +
                         ", " + std::to_string(z.t) + ") within radius " + std::to_string(max_radius));
}

namespace {

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

} // namespace

Site kth_open_above(const EnvOracle& oracle, Site z, int k, Side side) {
    return kth_open_above(oracle, z, k, side, oracle.scan_radius());
}

double IncrementLaw::total_mass() const noexcept {
    double total = 0.0;
    for (double m : mass) total += m;
    return total;
}

namespace {

void finish_law(IncrementLaw& law) {
    double s2 = 0.0;
    for (std::int64_t z = -law.radius; z <= law.radius; ++z) s2 += double(z) * double(z) * law.at(z);
    law.sigma2 = s2;
    law.abs_moments.clear();
    for (int m = 1; m <= 5; ++m) {
        double acc = 0.0;
        for (std::int64_t z = -law.radius; z <= law.radius; ++z) acc += std::pow(std::abs(double(z)), m) * law.at(z);
        law.abs_moments.emplace_back(m, acc);
    }
}

} // namespace

std::int64_t minimal_enumeration_window(const ModelParams& params) {
    params.validate();
    return std::max<std::int64_t>(1, radius_for_residual(params.p, params.max_rank(), 1e-10));
}

IncrementLaw increment_pmf_enumerated(const ModelParams& params, std::int64_t window) {
    params.validate();
    const int kmax = params.max_rank();
    if (window < 1 || binomial_lower_tail(params.p, 2 * window + 1, kmax) >= 1e-10)
        throw WindowTooSmallError("increment_pmf_enumerated: window " + std::to_string(window) +
                                  " leaves residual mass >= 1e-10");
    const double p = params.p;
    std::vector<double> q(static_cast<std::size_t>(kmax) + 2, 0.0);
    for (const auto& [rank, prob] : params.q)
        if (rank <= kmax) q[static_cast<std::size_t>(rank)] += prob;
    auto q_of = [&](int k) { return k >= 1 && k <= kmax ? q[static_cast<std::size_t>(k)] : 0.0; };

    IncrementLaw law;
    law.radius = window;
    law.mass.assign(static_cast<std::size_t>(2 * window + 1), 0.0);

    // count[c]: probability that exactly c open sites lie strictly inside the
    // current distance. Counts >= kmax can no longer host the target rank.
    std::vector<double> count(static_cast<std::size_t>(kmax), 0.0);
    law.mass[static_cast<std::size_t>(window)] = p * q_of(1);
    count[0] = 1.0 - p;
    if (kmax > 1) count[1] = p;

    const double one_open = p * (1.0 - p);
    const double both_open = p * p;
    const double none_open = (1.0 - p) * (1.0 - p);
    std::vector<double> next(count.size());
    for (std::int64_t d = 1; d <= window; ++d) {
        double right = 0.0;
        for (int c = 0; c < kmax; ++c) {
            const double w = count[static_cast<std::size_t>(c)];
            if (w == 0.0) continue;
            right += w * one_open * q_of(c + 1);
            right += w * both_open * 0.5 * (q_of(c + 1) + q_of(c + 2));
        }
        law.mass[static_cast<std::size_t>(window + d)] = right;
        law.mass[static_cast<std::size_t>(window - d)] = right;

        std::fill(next.begin(), next.end(), 0.0);
        for (int c = 0; c < kmax; ++c) {
            const double w = count[static_cast<std::size_t>(c)];
            next[static_cast<std::size_t>(c)] += w * none_open;
            if (c + 1 < kmax) next[static_cast<std::size_t>(c + 1)] += w * 2.0 * one_open;
            if (c + 2 < kmax) next[static_cast<std::size_t>(c + 2)] += w * both_open;
        }
        count.swap(next);
    }

    double missing = 0.0;
    for (int c = 0; c < kmax; ++c) {
        double beyond = 0.0;
        for (int k = c + 1; k <= kmax; ++k) beyond += q_of(k);
        missing += count[static_cast<std::size_t>(c)] * beyond;
    }
    law.truncation_bound = missing;
    finish_law(law);
    return law;
}

IncrementLaw increment_pmf_enumerated(const ModelParams& params) {
    return increment_pmf_enumerated(params, minimal_enumeration_window(params) + 8);
}

IncrementLaw increment_pmf_paper_form(const ModelParams& params, std::int64_t zmax) {
    params.validate();
    const double p = params.p;
    IncrementLaw law;
    law.radius = zmax;
    law.mass.assign(static_cast<std::size_t>(2 * zmax + 1), 0.0);
    law.mass[static_cast<std::size_t>(zmax)] = p * params.q_at(1);
    for (std::int64_t zz = 1; zz <= zmax; ++zz) {
        const int z = static_cast<int>(zz);
        double v = 2.0 * p * std::pow(1.0 - p, 2 * z) * params.q_at(1) + std::pow(p, 2 * z + 1) * params.q_at(2 * z + 1);
        for (int k = 2; k <= 2 * z; ++k) {
            const double coeff = 2.0 * binomial(2 * z - 1, k - 1) + binomial(2 * z - 1, k - 2);
            v += std::pow(p, k) * std::pow(1.0 - p, 2 * z - k + 1) * coeff * params.q_at(k);
        }
        law.mass[static_cast<std::size_t>(zmax + zz)] = v;
        law.mass[static_cast<std::size_t>(zmax - zz)] = v;
    }
    law.truncation_bound = 1.0 - law.total_mass();
    finish_law(law);
    return law;
}

std::vector<MomentEstimate> moments(const IncrementLaw& law, const std::vector<int>& orders) {
    std::vector<MomentEstimate> out;
    out.reserve(orders.size());
    const double w = static_cast<double>(law.radius);
    for (int m : orders) {
        if (m < 0) throw std::invalid_argument("moments: order must be >= 0");
        double acc = 0.0;
        for (std::int64_t z = -law.radius; z <= law.radius; ++z) {
            const double mass = law.at(z);
            acc += (m == 0 ? 1.0 : std::pow(std::abs(double(z)), m)) * mass;
        }
        const double bound = w * std::max(law.truncation_bound, 0.0) * std::pow(w, m);
        out.push_back({m, acc, bound});
    }
    return out;
}

double signed_moment(const IncrementLaw& law, int order) {
    // Pair +z with -z so that odd moments of a symmetric law cancel exactly.
    double acc = order == 0 ? law.at(0) : 0.0;
    for (std::int64_t z = 1; z <= law.radius; ++z) {
        const double zp = std::pow(double(z), order);
        const double zn = std::pow(-double(z), order);
        acc += zp * law.at(z) + zn * law.at(-z);
    }
    return acc;
}

} // namespace gdnm
