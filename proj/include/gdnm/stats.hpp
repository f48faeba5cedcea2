#pragma once

#include "gdnm/env.hpp"
#include "gdnm/mathutil.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace gdnm {

/// One grid point of an estimate. `n` is the replica count; 0 marks an
/// exact (enumerated) value whose interval reflects truncation only.
struct SeriesRow {
    double grid = 0.0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t n = 0;
};

struct EstimateSeries {
    std::string name;
    std::string grid_label = "grid";
    std::vector<SeriesRow> rows;
    /// Named derived constants, e.g. "c_hat".
    std::map<std::string, double> derived;
    /// Optional analytic reference value per row (same length as rows).
    std::vector<double> reference;
};

struct RunOptions {
    unsigned workers = 0; ///< 0: one per hardware thread
    double confidence = 0.99;
};

class ConditioningEmptyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// P(tau_k > t) per grid time. derived: c_hat = max sqrt(t) P/|k|,
/// flatness = max/min of sqrt(t) P over positive grid times.
EstimateSeries tail_curve(const ModelParams& params, std::int64_t k, const std::vector<std::int64_t>& t_grid,
                          std::uint64_t replicas, const RunOptions& options = {});

/// P(walkers from 0 and floor(d n) meet by time t n^2) per t, with the
/// coalescing Brownian limit 2 Phi(-d / (sigma sqrt(2 t))) as reference.
EstimateSeries pair_meeting_cdf(const ModelParams& params, double d, const std::vector<double>& t_grid,
                                std::int64_t n, std::uint64_t replicas, const RunOptions& options = {});

/// KS distance between X_{floor(s n^2)} / (sigma n) and N(0, s) per s.
/// derived: "variance@<s>" is the sample variance of X / n.
EstimateSeries joint_marginal_check(const ModelParams& params, std::int64_t n, const std::vector<double>& s_grid,
                                    std::uint64_t replicas, const RunOptions& options = {});

/// P(some path born in R(u, t) leaves R(C u, 2 t) through a vertical side),
/// per t of the grid, at rescaling delta.
EstimateSeries box_exit_prob(const ModelParams& params, double u, const std::vector<double>& t_grid, double c_box,
                             double delta, std::uint64_t replicas, const RunOptions& options = {});

/// Counting variables at rescaled times t0 -> t0 + t for the segment [a, b].
struct EtaCount {
    double t0 = 0.0;
    double t = 0.0;
    double a = 0.0;
    double b = 0.0;
    double delta = 0.0;
    std::uint64_t replicas = 0;
    /// eta: distinct positions at t0 + t of paths born on [a, b] x {t0}.
    std::vector<std::uint64_t> eta;
    /// eta-hat: distinct positions inside (a, b) at t0 + t of paths born on
    /// the guarded line [a - g, b + g] x {t0}.
    std::vector<std::uint64_t> eta_hat;
    std::int64_t segment_sites = 0;

    double mean_eta() const;
    double mean_eta_hat() const;
    std::uint64_t count_eta_at_least(std::uint64_t k) const;
    double p_eta_at_least(std::uint64_t k) const;
    /// Condition-(E) reference (b - a) / sqrt(pi t).
    double eta_hat_bound() const;
};

/// `guard` is the half-width (in units of sqrt(t)) added on both sides of
/// [a, b] to approximate the full line for eta-hat.
EtaCount eta_counts(const ModelParams& params, double delta, double t0, double t, double a, double b,
                    std::uint64_t replicas, const RunOptions& options = {}, double guard = 4.0);

/// P(Z^m_1 = Z^0_1 | Z^m_1 <= Z^0_1) per m, exact by enumeration.
/// derived: inf, argmin.
EstimateSeries crossing_coalesce_prob(const ModelParams& params, const std::vector<std::int64_t>& m_grid);

/// Monte Carlo version of crossing_coalesce_prob with Wilson intervals.
EstimateSeries crossing_coalesce_prob_mc(const ModelParams& params, const std::vector<std::int64_t>& m_grid,
                                         std::uint64_t replicas, const RunOptions& options = {});

/// P(Z^m_1 - Z^0_1 = m) per m, exact by enumeration.
/// derived: sup, argmax, lower_bound, upper_bound, r.
EstimateSeries p00_probe(const ModelParams& params, const std::vector<std::int64_t>& m_grid);

/// Monte Carlo version of p00_probe.
EstimateSeries p00_probe_mc(const ModelParams& params, const std::vector<std::int64_t>& m_grid,
                            std::uint64_t replicas, const RunOptions& options = {});

/// Closed-form bracket [lower, upper] for sup_m P(separation unchanged).
Interval p00_bounds(const ModelParams& params);

/// Occupied fraction of [-L/2, L/2] per time, averaged over replicas, from
/// every site of [-L, L]. derived: flatness of sqrt(t) density.
EstimateSeries density_curve(const ModelParams& params, std::int64_t L, const std::vector<std::int64_t>& t_grid,
                             std::uint64_t replicas, const RunOptions& options = {});

/// Frequency of {nu_k(u / delta) < tau_k and nu_k(u / delta) < t / delta^2}
/// per delta of the grid.
EstimateSeries separation_exit_frequency(const ModelParams& params, std::int64_t k, double u, double t,
                                         const std::vector<double>& delta_grid, std::uint64_t replicas,
                                         const RunOptions& options = {});

/// max/min over the values.
double max_min_ratio(const std::vector<double>& values);

} // namespace gdnm
