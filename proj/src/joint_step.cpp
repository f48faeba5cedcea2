#include "gdnm/joint_step.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <stdexcept>

namespace gdnm {

double JointStepLaw::at(std::int64_t a, std::int64_t b) const noexcept {
    if (a < -radius || a > radius || b < -radius || b > radius) return 0.0;
    const std::int64_t side = 2 * radius + 1;
    return mass[static_cast<std::size_t>((a + radius) * side + (b + radius))];
}

double JointStepLaw::separation_change(std::int64_t shift) const noexcept {
    double total = 0.0;
    for (std::int64_t a = -radius; a <= radius; ++a) total += at(a, a + shift);
    return total;
}

double JointStepLaw::cross() const noexcept {
    double total = 0.0;
    for (std::int64_t a = -radius; a <= radius; ++a)
        for (std::int64_t b = -radius; b <= radius; ++b)
            if (separation + b - a < 0) total += at(a, b);
    return total;
}

std::map<std::int64_t, double> JointStepLaw::increment_law() const {
    std::map<std::int64_t, double> out;
    for (std::int64_t a = -radius; a <= radius; ++a)
        for (std::int64_t b = -radius; b <= radius; ++b) {
            const double w = at(a, b);
            if (w > 0.0) out[b - a] += w;
        }
    return out;
}

std::int64_t joint_step_radius(const ModelParams& params, double tol) {
    params.validate();
    return std::max<std::int64_t>(1, radius_for_residual(params.p, params.max_rank(), tol));
}

namespace {

// How one walker's landing event constrains a single site of the row above.
enum Role : unsigned {
    kNone = 0,
    kInterior = 1, // strictly closer than the landing distance: counted
    kTarget = 2,   // the landing site: must be open
    kMirror = 4,   // the equidistant site on the other side: its state matters
};

struct WalkerEvent {
    std::int64_t centre = 0;
    std::int64_t displacement = 0;

    unsigned role(std::int64_t site) const noexcept {
        const std::int64_t d = std::abs(displacement);
        const std::int64_t off = site - centre;
        if (off == displacement) return kTarget;
        if (d > 0 && off == -displacement) return kMirror;
        if (std::abs(off) < d) return kInterior;
        return kNone;
    }
};

// Probability of the walker's (zeta, theta) draws selecting the target given
// `inside` open sites strictly within the landing distance and the mirror's
// state. `q` is indexed by rank.
double landing_weight(const std::vector<double>& q, const WalkerEvent& ev, int inside, bool mirror_open) {
    auto q_of = [&](int k) { return k >= 1 && k < int(q.size()) ? q[static_cast<std::size_t>(k)] : 0.0; };
    if (ev.displacement == 0) return q_of(1);
    if (!mirror_open) return q_of(inside + 1);
    return 0.5 * (q_of(inside + 1) + q_of(inside + 2));
}

} // namespace

JointStepLaw joint_step_law(const ModelParams& params, std::int64_t separation, std::int64_t radius) {
    params.validate();
    if (separation < 1) throw std::invalid_argument("joint_step_law: separation must be >= 1");
    if (radius < 1) throw std::invalid_argument("joint_step_law: radius must be >= 1");
    const int kmax = params.max_rank();
    std::vector<double> q(static_cast<std::size_t>(kmax) + 3, 0.0);
    for (const auto& [rank, prob] : params.q)
        if (rank >= 1 && rank <= kmax) q[static_cast<std::size_t>(rank)] += prob;
    const double p = params.p;

    JointStepLaw law;
    law.separation = separation;
    law.radius = radius;
    const std::int64_t side = 2 * radius + 1;
    law.mass.assign(static_cast<std::size_t>(side * side), 0.0);
    law.truncation_bound = 2.0 * binomial_lower_tail(p, 2 * radius + 1, kmax);

    // State: (count0, mirror0, count1, mirror1). Counts >= kmax carry no
    // weight and are dropped.
    const auto states = static_cast<std::size_t>(kmax * 2 * kmax * 2);
    auto index = [kmax](int c0, int m0, int c1, int m1) {
        return static_cast<std::size_t>(((c0 * 2 + m0) * kmax + c1) * 2 + m1);
    };
    std::vector<double> cur(states), nxt(states);

    for (std::int64_t a = -radius; a <= radius; ++a) {
        for (std::int64_t b = -radius; b <= radius; ++b) {
            const WalkerEvent w0{0, a};
            const WalkerEvent w1{separation, b};
            const std::int64_t lo = std::min(-std::abs(a), separation - std::abs(b));
            const std::int64_t hi = std::max(std::abs(a), separation + std::abs(b));

            std::fill(cur.begin(), cur.end(), 0.0);
            cur[index(0, 0, 0, 0)] = 1.0;
            for (std::int64_t s = lo; s <= hi; ++s) {
                const unsigned r0 = w0.role(s);
                const unsigned r1 = w1.role(s);
                if (r0 == kNone && r1 == kNone) continue;
                std::fill(nxt.begin(), nxt.end(), 0.0);
                for (int c0 = 0; c0 < kmax; ++c0)
                    for (int m0 = 0; m0 < 2; ++m0)
                        for (int c1 = 0; c1 < kmax; ++c1)
                            for (int m1 = 0; m1 < 2; ++m1) {
                                const double w = cur[index(c0, m0, c1, m1)];
                                if (w == 0.0) continue;
                                // closed
                                if (!(r0 & kTarget) && !(r1 & kTarget))
                                    nxt[index(c0, m0, c1, m1)] += w * (1.0 - p);
                                // open
                                int n0 = c0 + ((r0 & kInterior) ? 1 : 0);
                                int n1 = c1 + ((r1 & kInterior) ? 1 : 0);
                                if (n0 >= kmax || n1 >= kmax) continue;
                                const int o0 = (r0 & kMirror) ? 1 : m0;
                                const int o1 = (r1 & kMirror) ? 1 : m1;
                                nxt[index(n0, o0, n1, o1)] += w * p;
                            }
                cur.swap(nxt);
            }

            double total = 0.0;
            for (int c0 = 0; c0 < kmax; ++c0)
                for (int m0 = 0; m0 < 2; ++m0)
                    for (int c1 = 0; c1 < kmax; ++c1)
                        for (int m1 = 0; m1 < 2; ++m1) {
                            const double w = cur[index(c0, m0, c1, m1)];
                            if (w == 0.0) continue;
                            total += w * landing_weight(q, w0, c0, m0 != 0) * landing_weight(q, w1, c1, m1 != 0);
                        }
            law.mass[static_cast<std::size_t>((a + radius) * side + (b + radius))] = total;
        }
    }
    return law;
}

JointStepLaw joint_step_law(const ModelParams& params, std::int64_t separation) {
    return joint_step_law(params, separation, joint_step_radius(params));
}

} // namespace gdnm
