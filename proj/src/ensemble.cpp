#include "gdnm/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace gdnm {

std::size_t PathEnsemble::class_count(std::int64_t n) const {
    const auto& row = classes[static_cast<std::size_t>(n)];
    std::size_t count = 0;
    for (std::size_t w = 0; w < row.size(); ++w)
        if (row[w] == w) ++count;
    return count;
}

namespace {

std::vector<std::size_t> class_labels(const std::vector<std::vector<std::int64_t>>& positions, std::size_t n) {
    const std::size_t walkers = positions.size();
    std::vector<std::size_t> labels(walkers);
    std::unordered_map<std::int64_t, std::size_t> first;
    first.reserve(walkers * 2);
    for (std::size_t w = 0; w < walkers; ++w) {
        const auto [it, inserted] = first.try_emplace(positions[w][n], w);
        labels[w] = it->second;
    }
    return labels;
}

} // namespace

PathEnsemble evolve(const EnvOracle& oracle, std::span<const Site> starts, std::int64_t horizon,
                    EvolveOptions options) {
    if (horizon < 1) throw std::invalid_argument("evolve: horizon must be >= 1");
    if (starts.empty()) throw std::invalid_argument("evolve: no start sites");
    const std::int64_t t0 = starts.front().t;
    for (const Site& s : starts)
        if (s.t != t0) throw std::invalid_argument("evolve: all start sites must share one time");

    PathEnsemble ens;
    ens.starts.assign(starts.begin(), starts.end());
    ens.horizon = horizon;
    const std::size_t walkers = starts.size();
    const auto steps = static_cast<std::size_t>(horizon);
    ens.positions.assign(walkers, std::vector<std::int64_t>(steps + 1));
    for (std::size_t w = 0; w < walkers; ++w) ens.positions[w][0] = starts[w].x;
    ens.classes.reserve(steps + 1);
    ens.classes.push_back(class_labels(ens.positions, 0));

    const std::int64_t radius = oracle.scan_radius();
    for (std::size_t n = 0; n < steps; ++n) {
        const auto& labels = ens.classes.back();
        const std::int64_t t = t0 + static_cast<std::int64_t>(n);
        // One step per class: walkers on a common site share the move.
        for (std::size_t w = 0; w < walkers; ++w) {
            if (labels[w] == w) {
                ens.positions[w][n + 1] = step(oracle, Site{ens.positions[w][n], t}, radius).x;
            } else {
                ens.positions[w][n + 1] = ens.positions[labels[w]][n + 1];
            }
        }
        ens.classes.push_back(class_labels(ens.positions, n + 1));

        if (!options.track_crossings) continue;
        for (std::size_t a = 0; a < walkers; ++a) {
            for (std::size_t b = a + 1; b < walkers; ++b) {
                const std::int64_t before = ens.positions[a][n] - ens.positions[b][n];
                const std::int64_t after = ens.positions[a][n + 1] - ens.positions[b][n + 1];
                if ((before < 0 && after > 0) || (before > 0 && after < 0))
                    ens.crossings.push_back({a, b, static_cast<std::int64_t>(n)});
            }
        }
    }
    return ens;
}

PairTimes pair_stopping_times(const EnvOracle& oracle, std::int64_t k, double u, std::int64_t horizon) {
    PairTimes out;
    const std::int64_t radius = oracle.scan_radius();
    Site a{0, 0};
    Site b{k, 0};
    for (std::int64_t n = 0; n <= horizon; ++n) {
        const std::int64_t y = b.x - a.x;
        if (!out.nu && double(y) >= u) out.nu = n;
        if (y == 0) {
            out.tau = n;
            // Coalesced: the separation stays 0 from here on.
            return out;
        }
        if (n == horizon) break;
        a = step(oracle, a, radius);
        b = step(oracle, b, radius);
    }
    return out;
}

StoppingTime coalescence_time(const EnvOracle& oracle, std::int64_t k, std::int64_t horizon) {
    return pair_stopping_times(oracle, k, std::numeric_limits<double>::infinity(), horizon).tau;
}

StoppingTime exit_time_nu(const EnvOracle& oracle, std::int64_t k, double u, std::int64_t horizon) {
    if (std::isinf(u) && u > 0) return std::nullopt;
    if (double(k) >= u) return 0;
    const std::int64_t radius = oracle.scan_radius();
    Site a{0, 0};
    Site b{k, 0};
    for (std::int64_t n = 1; n <= horizon; ++n) {
        a = step(oracle, a, radius);
        b = step(oracle, b, radius);
        const std::int64_t y = b.x - a.x;
        if (double(y) >= u) return n;
        if (y == 0) return std::nullopt; // absorbed at 0 < u
    }
    return std::nullopt;
}

std::vector<std::int64_t> advance_occupied(const EnvOracle& oracle, std::vector<std::int64_t> row,
                                           std::int64_t t0, std::int64_t steps) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    const std::int64_t radius = oracle.scan_radius();
    for (std::int64_t n = 0; n < steps; ++n) {
        for (auto& x : row) x = step(oracle, Site{x, t0 + n}, radius).x;
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    return row;
}

namespace {

double window_fraction(const std::vector<std::int64_t>& occupied, std::int64_t L) {
    const std::int64_t half = L / 2;
    const auto lo = std::lower_bound(occupied.begin(), occupied.end(), -half);
    const auto hi = std::upper_bound(occupied.begin(), occupied.end(), half);
    return double(hi - lo) / double(2 * half + 1);
}

void check_guard(std::int64_t L, std::int64_t t) {
    if (t < 0) throw std::invalid_argument("occupied_density: t must be >= 0");
    if (double(L) < 8.0 * std::sqrt(double(t)))
        throw std::invalid_argument("occupied_density: L = " + std::to_string(L) + " violates L >= 8 sqrt(t) at t = " +
                                    std::to_string(t));
}

} // namespace

double occupied_density(const EnvOracle& oracle, std::int64_t L, std::int64_t t) {
    const std::int64_t grid[] = {t};
    return occupied_density_curve(oracle, L, grid).front();
}

std::vector<double> occupied_density_curve(const EnvOracle& oracle, std::int64_t L,
                                           std::span<const std::int64_t> t_grid) {
    if (L < 1) throw std::invalid_argument("occupied_density: L must be >= 1");
    std::vector<double> out;
    out.reserve(t_grid.size());
    std::vector<std::int64_t> row;
    for (std::int64_t x = -L; x <= L; ++x) row.push_back(x);
    std::int64_t now = 0;
    for (std::int64_t t : t_grid) {
        check_guard(L, t);
        if (t < now) throw std::invalid_argument("occupied_density_curve: time grid must be ascending");
        row = advance_occupied(oracle, std::move(row), now, t - now);
        now = t;
        out.push_back(window_fraction(row, L));
    }
    return out;
}

RescaledEnsemble::RescaledEnsemble(const PathEnsemble& ensemble, double delta, double sigma)
    : delta_(delta), sigma_(sigma), t0_(ensemble.start_time()) {
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("rescale: delta must lie in (0,1]");
    if (!(sigma > 0.0)) throw std::invalid_argument("rescale: sigma must be positive");
    nodes_.reserve(ensemble.walkers());
    for (const auto& path : ensemble.positions) {
        std::vector<double> v;
        v.reserve(path.size());
        for (std::int64_t x : path) v.push_back(delta * double(x) / sigma);
        nodes_.push_back(std::move(v));
    }
}

double RescaledEnsemble::value(std::size_t walker, double s) const {
    const auto& v = nodes_.at(walker);
    const double h = delta_ * delta_;
    const double local = s / h - double(t0_);
    const double last = double(v.size() - 1);
    if (local < -1e-9 || local > last + 1e-9) throw std::out_of_range("RescaledEnsemble::value: time outside path");
    const double nearest = std::round(local);
    if (std::abs(local - nearest) < 1e-9) return v[static_cast<std::size_t>(std::clamp(nearest, 0.0, last))];
    const double clamped = std::clamp(local, 0.0, last);
    const auto n = static_cast<std::size_t>(std::floor(clamped));
    if (n + 1 >= v.size()) return v.back();
    const double frac = clamped - double(n);
    return (1.0 - frac) * v[n] + frac * v[n + 1];
}

void write_trajectory_csv(std::ostream& out, std::size_t replica, const PathEnsemble& ensemble, bool header) {
    if (header) out << "replica,walker,t,x\n";
    for (std::size_t w = 0; w < ensemble.walkers(); ++w) {
        for (std::int64_t n = 0; n <= ensemble.horizon; ++n) {
            out << replica << ',' << w << ',' << ensemble.start_time() + n << ','
                << ensemble.positions[w][static_cast<std::size_t>(n)] << '\n';
        }
    }
}

} // namespace gdnm
