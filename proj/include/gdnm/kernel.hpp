#pragma once

#include "gdnm/env.hpp"

#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace gdnm {

/// No k-th open site within the maximum scan radius.
class ScanLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class WindowTooSmallError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Which total order on the row above resolves equidistant open pairs.
enum class Side : int {
    LeftFirst = 0,  ///< distance ascending, left before right at equal distance
    RightFirst = 1, ///< distance ascending, right before left at equal distance
};

/// Where rank k lands among the open sites of the row above a site.
struct RankLocation {
    std::int64_t distance = 0;
    /// Number of open sites at this distance (1 or 2; the centre counts once).
    int open_at_distance = 1;
    /// Rank of the target within the sites at this distance, 1 or 2.
    int rank_within = 1;
    /// For a single open site at this distance: -1 left, +1 right, 0 centre.
    int sign = 0;

    /// True when the left-first and right-first orders pick the same site.
    bool unique() const noexcept { return open_at_distance == 1; }
};

/// Anything that answers the three environment queries at a site.
template <class E>
concept Environment = requires(const E& env, Site z) {
    { env.omega(z) } -> std::convertible_to<bool>;
    { env.theta(z) } -> std::convertible_to<bool>;
    { env.zeta(z) } -> std::convertible_to<int>;
};

[[noreturn]] void throw_scan_limit(Site z, int k, std::int64_t max_radius);

template <Environment E>
RankLocation locate_rank(const E& env, Site z, int k, std::int64_t max_radius) {
    const std::int64_t row = z.t + 1;
    int seen = 0;
    if (env.omega(Site{z.x, row})) {
        if (k == 1) return {0, 1, 1, 0};
        seen = 1;
    }
    for (std::int64_t d = 1; d <= max_radius; ++d) {
        const bool left = env.omega(Site{z.x - d, row});
        const bool right = env.omega(Site{z.x + d, row});
        const int open = int(left) + int(right);
        if (seen + open >= k) {
            if (open == 2) return {d, 2, k - seen, 0};
            return {d, 1, 1, left ? -1 : 1};
        }
        seen += open;
    }
    throw_scan_limit(z, k, max_radius);
}

/// Resolves a located rank to a site; `side` only matters at a tie.
inline Site resolve(Site z, const RankLocation& loc, Side side) noexcept {
    if (loc.unique()) return {z.x + loc.sign * loc.distance, z.t + 1};
    const bool go_left = (loc.rank_within == 1) == (side == Side::LeftFirst);
    return {go_left ? z.x - loc.distance : z.x + loc.distance, z.t + 1};
}

/// The k-th open site in row z.t + 1 under the given tie order.
template <Environment E>
Site kth_open_above(const E& env, Site z, int k, Side side, std::int64_t max_radius) {
    if (k < 1) throw std::invalid_argument("kth_open_above: k must be >= 1");
    return resolve(z, locate_rank(env, z, k, max_radius), side);
}

Site kth_open_above(const EnvOracle& oracle, Site z, int k, Side side);

/// True when the left-first and right-first orders agree at rank k.
template <Environment E>
bool orders_agree(const E& env, Site z, int k, std::int64_t max_radius) {
    return locate_rank(env, z, k, max_radius).unique();
}

/// One step of the drainage map: rank from zeta(z), tie coin from theta(z).
/// The coin is read only when the two tie orders disagree at that rank.
/// The coin is only read when the two orders disagree.
template <Environment E>
Site step(const E& env, Site z, std::int64_t max_radius) {
    const RankLocation loc = locate_rank(env, z, env.zeta(z), max_radius);
    if (loc.unique()) return resolve(z, loc, Side::LeftFirst);
    return resolve(z, loc, env.theta(z) ? Side::RightFirst : Side::LeftFirst);
}

inline Site step(const EnvOracle& oracle, Site z) { return step(oracle, z, oracle.scan_radius()); }

/// Exact law of a one-step displacement, symmetric about 0.
struct IncrementLaw {
    std::int64_t radius = 0;  ///< pmf is stored on [-radius, radius]
    std::vector<double> mass; ///< mass[z + radius]
    /// Mass that may lie outside the stored window.
    double truncation_bound = 0.0;
    double sigma2 = 0.0;
    /// (order, E|xi|^order) computed over the stored window.
    std::vector<std::pair<int, double>> abs_moments;

    double at(std::int64_t z) const noexcept {
        if (z < -radius || z > radius) return 0.0;
        return mass[static_cast<std::size_t>(z + radius)];
    }
    double total_mass() const noexcept;
};

/// Smallest window for which increment_pmf_enumerated accepts `params`.
std::int64_t minimal_enumeration_window(const ModelParams& params);

/// Ground-truth displacement law, by an exact recursion over the
/// openness of the row above, shell by shell outward from the centre.
IncrementLaw increment_pmf_enumerated(const ModelParams& params, std::int64_t window);
IncrementLaw increment_pmf_enumerated(const ModelParams& params);

/// Evaluates the published simplified closed form for the increment pmf at
/// 1 <= |z| <= zmax. pmf(0) is set to p*q(1). The result is not normalised;
/// truncation_bound holds 1 - total and may be negative.
IncrementLaw increment_pmf_paper_form(const ModelParams& params, std::int64_t zmax);

struct MomentEstimate {
    int order = 0;
    double value = 0.0;
    double error_bound = 0.0;
};

/// Absolute moments E|xi|^m of the stored law.
std::vector<MomentEstimate> moments(const IncrementLaw& law, const std::vector<int>& orders);

/// Signed moment E[xi^m].
double signed_moment(const IncrementLaw& law, int order);

} // namespace gdnm
