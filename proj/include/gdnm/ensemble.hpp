#pragma once

#include "gdnm/env.hpp"
#include "gdnm/kernel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace gdnm {

/// First passage time; std::nullopt means censored (not reached by the horizon).
using StoppingTime = std::optional<std::int64_t>;

/// Walkers a and b swapped left/right order between times n and n + 1
/// without meeting.
struct Crossing {
    std::size_t a = 0;
    std::size_t b = 0;
    std::int64_t n = 0;

    friend bool operator==(const Crossing&, const Crossing&) = default;
};

struct PathEnsemble {
    std::vector<Site> starts;
    std::int64_t horizon = 0;
    /// positions[w][n]: position of walker w after n steps.
    std::vector<std::vector<std::int64_t>> positions;
    /// classes[n][w]: smallest walker index sharing walker w's site at step n.
    std::vector<std::vector<std::size_t>> classes;
    std::vector<Crossing> crossings;

    std::size_t walkers() const noexcept { return starts.size(); }
    std::int64_t start_time() const noexcept { return starts.empty() ? 0 : starts.front().t; }
    Site site(std::size_t walker, std::int64_t n) const {
        return {positions[walker][static_cast<std::size_t>(n)], start_time() + n};
    }
    std::size_t class_count(std::int64_t n) const;
};

struct EvolveOptions {
    bool track_crossings = true;
};

/// Evolves every start site for `horizon` steps in the shared environment.
/// All starts must lie on the same row.
PathEnsemble evolve(const EnvOracle& oracle, std::span<const Site> starts, std::int64_t horizon,
                    EvolveOptions options = {});

struct PairTimes {
    StoppingTime tau; ///< first n with Z^k_n == Z^0_n
    StoppingTime nu;  ///< first n with Z^k_n - Z^0_n >= u
};

/// Runs walkers from (0,0) and (k,0) until both stopping times are decided
/// or the horizon passes.
PairTimes pair_stopping_times(const EnvOracle& oracle, std::int64_t k, double u, std::int64_t horizon);

StoppingTime coalescence_time(const EnvOracle& oracle, std::int64_t k, std::int64_t horizon);

/// First time the separation reaches at least u. u = +infinity never happens.
StoppingTime exit_time_nu(const EnvOracle& oracle, std::int64_t k, double u, std::int64_t horizon);

/// Sorted distinct positions after `steps` steps of walkers started at
/// every position of `row` on row `t0`.
std::vector<std::int64_t> advance_occupied(const EnvOracle& oracle, std::vector<std::int64_t> row,
                                           std::int64_t t0, std::int64_t steps);

/// Fraction of sites in [-L/2, L/2] occupied at time t by walkers started
/// from every site of [-L, L] at time 0. Requires L >= 8 sqrt(t).
double occupied_density(const EnvOracle& oracle, std::int64_t L, std::int64_t t);

/// Densities at each time of an ascending grid, from one nested run.
std::vector<double> occupied_density_curve(const EnvOracle& oracle, std::int64_t L,
                                           std::span<const std::int64_t> t_grid);

/// Diffusively rescaled paths: space by delta / sigma, time by delta^2.
class RescaledEnsemble {
public:
    RescaledEnsemble(const PathEnsemble& ensemble, double delta, double sigma);

    double delta() const noexcept { return delta_; }
    double sigma() const noexcept { return sigma_; }
    std::size_t walkers() const noexcept { return nodes_.size(); }

    double node_time(std::int64_t n) const noexcept { return delta_ * delta_ * double(t0_ + n); }
    double node_value(std::size_t walker, std::int64_t n) const {
        return nodes_[walker][static_cast<std::size_t>(n)];
    }
    /// Linear interpolation between nodes; s must lie in the path's time span.
    double value(std::size_t walker, double s) const;

private:
    double delta_;
    double sigma_;
    std::int64_t t0_;
    std::vector<std::vector<double>> nodes_;
};

inline RescaledEnsemble rescale(const PathEnsemble& ensemble, double delta, double sigma) {
    return RescaledEnsemble(ensemble, delta, sigma);
}

/// Appends rows `replica,walker,t,x`; writes the header when `header` is set.
void write_trajectory_csv(std::ostream& out, std::size_t replica, const PathEnsemble& ensemble,
                          bool header = true);

} // namespace gdnm
