#pragma once

#include "gdnm/env.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace gdnm {

/// Integer pmf keyed by value.
using IntegerPmf = std::map<std::int64_t, double>;

class NonCenteredError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class AccuracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Stateless counter-based stream: the i-th draw is mix64(key + i).
/// Satisfies UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed) : key_(mix64(seed ^ 0x6a09e667f3bcc909ULL)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() noexcept { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

    /// Uniform in (0, 1); never returns 0.
    double uniform() noexcept { return (double((*this)() >> 11) + 0.5) * 0x1.0p-53; }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

struct PairAtom {
    std::int64_t u = 0; ///< u < 0
    std::int64_t v = 0; ///< v > 0
    double weight = 0.0;
};

/// Two-point (Skorohod) representation of a centred integer law: draw (U, V)
/// from the atoms, then run Brownian motion from 0 until it leaves (U, V).
struct PairLaw {
    std::vector<PairAtom> atoms;
    double zero_atom = 0.0;

    double total_mass() const noexcept;
    /// max over z of |law of B(T) at z - pmf(z)|, computed exactly from the atoms.
    double pushforward_error(const IntegerPmf& pmf) const;
};

/// Builds the (v - u)-weighted product mixture. Throws NonCenteredError when
/// the mean differs from 0 by more than 1e-12.
PairLaw skorohod_pair_law(const IntegerPmf& pmf);

enum class ExitSide { Left, Right };

/// Side through which Brownian motion from 0 leaves (u, v).
ExitSide exit_side(double u, double v, CounterRng& rng);

/// P(T > t) for the exit time T of (u, v) by Brownian motion from 0, with
/// series truncation error at most `accuracy`.
double exit_survival(double u, double v, double t, double accuracy = 1e-12);

/// Exit time sample by inverse CDF on the truncated series.
double exit_time_sample(double u, double v, CounterRng& rng, double accuracy = 1e-12);

/// One draw of the embedded increment: v on a right exit, u on a left exit,
/// 0 from the zero atom.
std::int64_t embed_one_step(const PairLaw& law, CounterRng& rng);
std::int64_t embed_one_step(const IntegerPmf& pmf, CounterRng& rng);

/// P(first hitting time of level a by standard Brownian motion >= x).
double bm_level_hit_tail(double a, double x);
/// Hitting-time density a / sqrt(2 pi y^3) exp(-a^2 / (2y)).
double bm_hit_density(double a, double y);
/// The published integrand, with exponent -a / (2y).
double bm_hit_density_published(double a, double y);
/// Closed-form integral of the published integrand over [x, inf):
/// sqrt(a) (2 Phi(sqrt(a / x)) - 1).
double bm_level_hit_tail_published(double a, double x);

} // namespace gdnm
