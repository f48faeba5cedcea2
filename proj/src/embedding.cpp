#include "gdnm/embedding.hpp"

#include "gdnm/mathutil.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace gdnm {

double PairLaw::total_mass() const noexcept {
    double total = zero_atom;
    for (const auto& a : atoms) total += a.weight;
    return total;
}

double PairLaw::pushforward_error(const IntegerPmf& pmf) const {
    IntegerPmf image;
    if (zero_atom > 0.0) image[0] += zero_atom;
    for (const auto& a : atoms) {
        const double span = double(a.v - a.u);
        image[a.v] += a.weight * double(-a.u) / span;
        image[a.u] += a.weight * double(a.v) / span;
    }
    double err = 0.0;
    for (const auto& [z, w] : image) {
        const auto it = pmf.find(z);
        err = std::max(err, std::abs(w - (it == pmf.end() ? 0.0 : it->second)));
    }
    for (const auto& [z, w] : pmf)
        if (!image.contains(z)) err = std::max(err, std::abs(w));
    return err;
}

PairLaw skorohod_pair_law(const IntegerPmf& pmf) {
    double total = 0.0;
    double mean = 0.0;
    double abs_mean = 0.0;
    for (const auto& [z, w] : pmf) {
        if (w < 0.0) throw std::invalid_argument("skorohod_pair_law: negative mass");
        total += w;
        mean += double(z) * w;
        abs_mean += std::abs(double(z)) * w;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw std::invalid_argument("skorohod_pair_law: mass sums to " + std::to_string(total));
    if (std::abs(mean) > 1e-12 * std::max(1.0, abs_mean))
        throw NonCenteredError("skorohod_pair_law: mean " + std::to_string(mean) + " is not 0");

    PairLaw law;
    const auto zero = pmf.find(0);
    law.zero_atom = zero == pmf.end() ? 0.0 : zero->second / total;
    // Half the absolute first moment equals the positive part's mean.
    const double m = 0.5 * abs_mean / total;
    if (m == 0.0) return law;
    for (const auto& [u, wu] : pmf) {
        if (u >= 0 || wu == 0.0) continue;
        for (const auto& [v, wv] : pmf) {
            if (v <= 0 || wv == 0.0) continue;
            law.atoms.push_back({u, v, double(v - u) * (wu / total) * (wv / total) / m});
        }
    }
    return law;
}

ExitSide exit_side(double u, double v, CounterRng& rng) {
    if (!(u < 0.0 && v > 0.0)) throw std::invalid_argument("exit_side: need u < 0 < v");
    return rng.uniform() < -u / (v - u) ? ExitSide::Right : ExitSide::Left;
}

namespace {

constexpr long kMaxTerms = 1'000'000;

// Method of images; fast for t small against the squared width.
double survival_images(double u, double v, double t, double accuracy) {
    const double width = v - u;
    const double rt = std::sqrt(t);
    auto term = [&](long k) {
        const double shift = 2.0 * double(k) * width;
        const double direct = normal_cdf((v - shift) / rt) - normal_cdf((u - shift) / rt);
        const double mirrored = normal_cdf((-v - shift) / rt) - normal_cdf((u - 2.0 * v - shift) / rt);
        return direct - mirrored;
    };
    double total = term(0);
    for (long k = 1; k <= kMaxTerms; ++k) {
        const double a = term(k);
        const double b = term(-k);
        total += a + b;
        // Terms decay like exp(-(2k L)^2 / 2t); the remainder is below the last pair.
        if (k >= 2 && std::abs(a) + std::abs(b) < 0.25 * accuracy) return total;
    }
    throw AccuracyError("exit_survival: image series did not reach the requested accuracy");
}

// Eigenfunction expansion; fast for t large against the squared width.
double survival_spectral(double u, double v, double t, double accuracy) {
    const double width = v - u;
    const double x0 = -u;
    const double rate = std::numbers::pi * std::numbers::pi * t / (2.0 * width * width);
    double total = 0.0;
    for (long n = 1; n <= kMaxTerms; n += 2) {
        const double dn = double(n);
        total += 4.0 / (dn * std::numbers::pi) * std::sin(dn * std::numbers::pi * x0 / width) * std::exp(-dn * dn * rate);
        // Bound on the odd terms past n.
        const double next = dn + 2.0;
        const double ratio = std::exp(-(4.0 * next + 4.0) * rate);
        const double tail = 4.0 / (next * std::numbers::pi) * std::exp(-next * next * rate) / (1.0 - ratio);
        if (tail <= accuracy) return total;
    }
    throw AccuracyError("exit_survival: spectral series did not reach the requested accuracy");
}

} // namespace

double exit_survival(double u, double v, double t, double accuracy) {
    if (!(u < 0.0 && v > 0.0)) throw std::invalid_argument("exit_survival: need u < 0 < v");
    if (!(accuracy >= 1e-15)) throw AccuracyError("exit_survival: accuracy below 1e-15 cannot be resolved in double precision");
    if (t <= 0.0) return 1.0;
    const double width = v - u;
    const double s = t < 0.25 * width * width ? survival_images(u, v, t, accuracy) : survival_spectral(u, v, t, accuracy);
    return std::clamp(s, 0.0, 1.0);
}

double exit_time_sample(double u, double v, CounterRng& rng, double accuracy) {
    if (!(u < 0.0 && v > 0.0)) throw std::invalid_argument("exit_time_sample: need u < 0 < v");
    const double target = rng.uniform();
    // S(t) decreases from 1 to 0; find S(t) = target.
    double lo = 0.0;
    double hi = -u * v;
    while (exit_survival(u, v, hi, accuracy) > target) {
        lo = hi;
        hi *= 2.0;
    }
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (exit_survival(u, v, mid, accuracy) > target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

std::int64_t embed_one_step(const PairLaw& law, CounterRng& rng) {
    double pick = rng.uniform() * law.total_mass();
    if (pick < law.zero_atom) return 0;
    pick -= law.zero_atom;
    const PairAtom* chosen = law.atoms.empty() ? nullptr : &law.atoms.back();
    for (const auto& a : law.atoms) {
        if (pick < a.weight) {
            chosen = &a;
            break;
        }
        pick -= a.weight;
    }
    if (!chosen) return 0;
    return exit_side(double(chosen->u), double(chosen->v), rng) == ExitSide::Right ? chosen->v : chosen->u;
}

std::int64_t embed_one_step(const IntegerPmf& pmf, CounterRng& rng) {
    return embed_one_step(skorohod_pair_law(pmf), rng);
}

double bm_level_hit_tail(double a, double x) {
    if (!(a > 0.0 && x > 0.0)) throw std::invalid_argument("bm_level_hit_tail: need a > 0 and x > 0");
    return std::erf(a / std::sqrt(2.0 * x));
}

double bm_hit_density(double a, double y) {
    if (y <= 0.0) return 0.0;
    return a / std::sqrt(2.0 * std::numbers::pi * y * y * y) * std::exp(-a * a / (2.0 * y));
}

double bm_hit_density_published(double a, double y) {
    if (y <= 0.0) return 0.0;
    return a / std::sqrt(2.0 * std::numbers::pi * y * y * y) * std::exp(-a / (2.0 * y));
}

double bm_level_hit_tail_published(double a, double x) {
    if (!(a > 0.0 && x > 0.0)) throw std::invalid_argument("bm_level_hit_tail_published: need a > 0 and x > 0");
    return std::sqrt(a) * std::erf(std::sqrt(a / (2.0 * x)));
}

} // namespace gdnm
