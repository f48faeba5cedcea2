#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gdnm {

/// A lattice site: x is space, t is time (the row index).
struct Site {
    std::int64_t x = 0;
    std::int64_t t = 0;

    friend bool operator==(const Site&, const Site&) = default;
};

/// Raised when a configuration violates a model invariant. `field()` names
/// the offending configuration key (e.g. "model.q").
class InvalidParams : public std::invalid_argument {
public:
    InvalidParams(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Full model specification: openness density, jump-rank law and master seed.
struct ModelParams {
    double p = 0.5;
    /// (rank, probability) pairs; ranks are >= 1.
    std::vector<std::pair<int, double>> q{{1, 1.0}};
    std::uint64_t seed = 0;

    /// Throws InvalidParams when 0 < p < 1 fails, q does not sum to 1 within
    /// 1e-12, or q has a rank < 1.
    void validate() const;

    /// Largest rank carrying positive mass.
    int max_rank() const;
    /// Smallest rank carrying positive mass.
    int min_rank() const;
    double q_at(int rank) const;
};

// splitmix64 finalizer: a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seed for replica `index` of a run with master seed `master`.
constexpr std::uint64_t derive_replica_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return mix64(master ^ mix64(index + 0x9e3779b97f4a7c15ULL));
}

inline double to_unit_interval(std::uint64_t word) noexcept {
    return static_cast<double>(word >> 11) * 0x1.0p-53;
}

enum class Family : std::uint64_t { Omega = 1, Theta = 2, Zeta = 3 };

/// Probability that fewer than `count` of `sites` independent Bernoulli(p)
/// sites are open.
double binomial_lower_tail(double p, std::int64_t sites, int count);

/// Smallest radius R such that fewer than `count` open sites in the 2R+1
/// sites of a row window has probability below `tolerance`.
std::int64_t radius_for_residual(double p, int count, double tolerance);

/// Lazily evaluated random environment. Every query is a pure function of
/// (seed, family, site); nothing is stored.
class EnvOracle {
public:
    explicit EnvOracle(ModelParams params);
    /// Same law as `params` with the seed replaced.
    EnvOracle(const ModelParams& params, std::uint64_t seed);

    /// The same law under another seed; skips revalidation.
    EnvOracle with_seed(std::uint64_t seed) const;

    const ModelParams& params() const noexcept { return params_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Default maximum scan radius for the step map: smallest radius whose
    /// residual mass is below 1e-12, times 4.
    std::int64_t scan_radius() const noexcept { return scan_radius_; }

    std::uint64_t word(Family family, Site z) const noexcept {
        const auto key = keys_[static_cast<std::size_t>(family) - 1];
        return mix64(key + static_cast<std::uint64_t>(z.x) * 0xd6e8feb86659fd93ULL +
                     static_cast<std::uint64_t>(z.t) * 0x9e3779b97f4a7c15ULL);
    }

    double uniform(Family family, Site z) const noexcept {
        return to_unit_interval(word(family, z));
    }

    bool omega(Site z) const noexcept { return uniform(Family::Omega, z) < params_.p; }
    bool theta(Site z) const noexcept { return (word(Family::Theta, z) >> 63) != 0; }

    int zeta(Site z) const noexcept {
        if (ranks_.size() == 1) return ranks_.front();
        const double u = uniform(Family::Zeta, z);
        for (std::size_t i = 0; i + 1 < ranks_.size(); ++i) {
            if (u < cdf_[i]) return ranks_[i];
        }
        return ranks_.back();
    }

private:
    void set_keys(std::uint64_t seed);

    ModelParams params_;
    std::uint64_t seed_;
    std::array<std::uint64_t, 3> keys_{};
    std::vector<int> ranks_;
    std::vector<double> cdf_;
    std::int64_t scan_radius_ = 0;
};

} // namespace gdnm
