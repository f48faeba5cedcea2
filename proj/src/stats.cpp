#include "gdnm/stats.hpp"

#include "gdnm/ensemble.hpp"
#include "gdnm/joint_step.hpp"
#include "gdnm/kernel.hpp"
#include "gdnm/replica.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gdnm {

namespace {

std::string key_of(const char* prefix, double v) {
    std::ostringstream out;
    out << prefix << '@' << v;
    return out.str();
}

SeriesRow proportion_row(double grid, std::uint64_t hits, std::uint64_t trials, double confidence) {
    const Interval ci = wilson_interval(hits, trials, confidence);
    return {grid, trials ? double(hits) / double(trials) : 0.0, ci.low, ci.high, trials};
}

double sigma_of(const ModelParams& params) { return std::sqrt(increment_pmf_enumerated(params).sigma2); }

void require_replicas(std::uint64_t replicas) {
    if (replicas < 1) throw std::invalid_argument("replicas must be >= 1");
}

} // namespace

double max_min_ratio(const std::vector<double>& values) {
    if (values.empty()) return 1.0;
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (*lo <= 0.0) return std::numeric_limits<double>::infinity();
    return *hi / *lo;
}

EstimateSeries tail_curve(const ModelParams& params, std::int64_t k, const std::vector<std::int64_t>& t_grid,
                          std::uint64_t replicas, const RunOptions& options) {
    require_replicas(replicas);
    if (k == 0) throw std::invalid_argument("tail_curve: k must be nonzero");
    if (t_grid.empty()) throw std::invalid_argument("tail_curve: empty time grid");
    const EnvOracle base(params);
    const std::int64_t horizon = *std::max_element(t_grid.begin(), t_grid.end());
    const auto taus = run_replicas(replicas, options.workers, [&](std::size_t i) {
        return coalescence_time(base.with_seed(derive_replica_seed(params.seed, i)), k, horizon);
    });

    EstimateSeries out;
    out.name = "tail";
    out.grid_label = "t";
    std::vector<double> scaled;
    double c_hat = 0.0;
    for (std::int64_t t : t_grid) {
        // Censored runs exceed the horizon, hence exceed every grid time.
        std::uint64_t alive = 0;
        for (const auto& tau : taus)
            if (!tau || *tau > t) ++alive;
        out.rows.push_back(proportion_row(double(t), alive, replicas, options.confidence));
        if (t > 0) {
            const double s = std::sqrt(double(t)) * out.rows.back().estimate;
            scaled.push_back(s);
            c_hat = std::max(c_hat, s / double(std::abs(k)));
        }
    }
    out.derived["c_hat"] = c_hat;
    out.derived["k"] = double(k);
    if (!scaled.empty()) out.derived["flatness"] = max_min_ratio(scaled);
    return out;
}

EstimateSeries pair_meeting_cdf(const ModelParams& params, double d, const std::vector<double>& t_grid,
                                std::int64_t n, std::uint64_t replicas, const RunOptions& options) {
    require_replicas(replicas);
    if (t_grid.empty()) throw std::invalid_argument("pair_meeting_cdf: empty time grid");
    if (n < 1) throw std::invalid_argument("pair_meeting_cdf: n must be >= 1");
    const double sigma = sigma_of(params);
    const auto gap = static_cast<std::int64_t>(std::floor(d * double(n)));
    const double n2 = double(n) * double(n);
    const auto horizon =
        static_cast<std::int64_t>(std::ceil(*std::max_element(t_grid.begin(), t_grid.end()) * n2));
    const EnvOracle base(params);
    const auto taus = run_replicas(replicas, options.workers, [&](std::size_t i) -> StoppingTime {
        if (gap == 0) return 0;
        return coalescence_time(base.with_seed(derive_replica_seed(params.seed, i)), gap, horizon);
    });

    EstimateSeries out;
    out.name = "pair";
    out.grid_label = "t";
    for (double t : t_grid) {
        const auto limit = static_cast<std::int64_t>(std::floor(t * n2));
        std::uint64_t met = 0;
        for (const auto& tau : taus)
            if (tau && *tau <= limit) ++met;
        out.rows.push_back(proportion_row(t, met, replicas, options.confidence));
        out.reference.push_back(t > 0 ? 2.0 * normal_cdf(-d / (sigma * std::sqrt(2.0 * t))) : (d == 0 ? 1.0 : 0.0));
    }
    out.derived["sigma"] = sigma;
    out.derived["d"] = d;
    out.derived["n"] = double(n);
    double worst = 0.0;
    for (std::size_t i = 0; i < out.rows.size(); ++i)
        worst = std::max(worst, std::abs(out.rows[i].estimate - out.reference[i]));
    out.derived["max_abs_error"] = worst;
    return out;
}

EstimateSeries joint_marginal_check(const ModelParams& params, std::int64_t n, const std::vector<double>& s_grid,
                                    std::uint64_t replicas, const RunOptions& options) {
    require_replicas(replicas);
    if (s_grid.empty()) throw std::invalid_argument("joint_marginal_check: empty grid");
    const double sigma = sigma_of(params);
    const double n2 = double(n) * double(n);
    std::vector<std::int64_t> times;
    for (double s : s_grid) times.push_back(static_cast<std::int64_t>(std::floor(s * n2)));
    const std::int64_t horizon = *std::max_element(times.begin(), times.end());
    const EnvOracle base(params);

    const auto paths = run_replicas(replicas, options.workers, [&](std::size_t i) {
        const EnvOracle oracle = base.with_seed(derive_replica_seed(params.seed, i));
        const std::int64_t radius = oracle.scan_radius();
        std::vector<double> at(times.size(), 0.0);
        Site z{0, 0};
        for (std::int64_t step_no = 0;; ++step_no) {
            for (std::size_t j = 0; j < times.size(); ++j)
                if (times[j] == step_no) at[j] = double(z.x);
            if (step_no == horizon) break;
            z = step(oracle, z, radius);
        }
        return at;
    });

    EstimateSeries out;
    out.name = "donsker";
    out.grid_label = "s";
    const double band = dkw_halfwidth(replicas, options.confidence);
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
        std::vector<double> scaled;
        std::vector<double> over_n;
        scaled.reserve(replicas);
        over_n.reserve(replicas);
        for (const auto& path : paths) {
            scaled.push_back(path[j] / (sigma * double(n)));
            over_n.push_back(path[j] / double(n));
        }
        const double ks = ks_distance_normal(scaled, times[j] == 0 && s_grid[j] == 0.0 ? 0.0 : std::sqrt(s_grid[j]));
        out.rows.push_back({s_grid[j], ks, std::max(0.0, ks - band), std::min(1.0, ks + band), replicas});
        out.derived[key_of("variance", s_grid[j])] = mean_estimate(over_n).stddev * mean_estimate(over_n).stddev;
    }
    out.derived["sigma2"] = sigma * sigma;
    out.derived["n"] = double(n);
    return out;
}

namespace {

void merge_into(std::vector<std::int64_t>& row, std::int64_t lo, std::int64_t hi, std::vector<std::int64_t>& scratch) {
    scratch.clear();
    scratch.reserve(row.size() + static_cast<std::size_t>(hi - lo + 1));
    auto it = row.begin();
    for (std::int64_t x = lo; x <= hi; ++x) {
        while (it != row.end() && *it < x) scratch.push_back(*it++);
        if (it != row.end() && *it == x) ++it;
        scratch.push_back(x);
    }
    scratch.insert(scratch.end(), it, row.end());
    row.swap(scratch);
}

bool box_exit_once(const EnvOracle& oracle, std::int64_t half_width, std::int64_t birth_until, std::int64_t until,
                   double barrier) {
    const std::int64_t radius = oracle.scan_radius();
    std::vector<std::int64_t> row;
    std::vector<std::int64_t> scratch;
    for (std::int64_t s = 0;; ++s) {
        if (s <= birth_until) merge_into(row, -half_width, half_width, scratch);
        if (!row.empty() && (double(-row.front()) > barrier || double(row.back()) > barrier)) return true;
        if (s == until) return false;
        for (auto& x : row) x = step(oracle, Site{x, s}, radius).x;
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
    }
}

} // namespace

EstimateSeries box_exit_prob(const ModelParams& params, double u, const std::vector<double>& t_grid, double c_box,
                             double delta, std::uint64_t replicas, const RunOptions& options) {
    require_replicas(replicas);
    if (!(c_box > 1.0)) throw std::invalid_argument("box_exit_prob: C_box must exceed 1");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("box_exit_prob: delta must lie in (0,1]");
    if (!(u > 0.0)) throw std::invalid_argument("box_exit_prob: u must be positive");
    const double sigma = sigma_of(params);
    const EnvOracle base(params);
    const double h = delta * delta;
    const auto half_width = static_cast<std::int64_t>(std::floor(u * sigma / delta));
    const double barrier = c_box * u * sigma / delta;

    EstimateSeries out;
    out.name = "boxexit";
    out.grid_label = "t";
    for (double t : t_grid) {
        if (!(t > 0.0)) throw std::invalid_argument("box_exit_prob: t must be positive");
        const auto birth_until = static_cast<std::int64_t>(std::floor(t / h));
        const auto until = static_cast<std::int64_t>(std::floor(2.0 * t / h));
        const auto hits = run_replicas(replicas, options.workers, [&](std::size_t i) -> int {
            return box_exit_once(base.with_seed(derive_replica_seed(params.seed, i)), half_width, birth_until, until,
                                 barrier);
        });
        std::uint64_t count = 0;
        for (int hit : hits) count += static_cast<std::uint64_t>(hit);
        out.rows.push_back(proportion_row(t, count, replicas, options.confidence));
        out.derived[key_of("p_over_t", t)] = out.rows.back().estimate / t;
    }
    out.derived["u"] = u;
    out.derived["C_box"] = c_box;
    out.derived["delta"] = delta;
    return out;
}

double EtaCount::mean_eta() const {
    double total = 0.0;
    for (std::size_t k = 0; k < eta.size(); ++k) total += double(k) * double(eta[k]);
    return replicas ? total / double(replicas) : 0.0;
}

double EtaCount::mean_eta_hat() const {
    double total = 0.0;
    for (std::size_t k = 0; k < eta_hat.size(); ++k) total += double(k) * double(eta_hat[k]);
    return replicas ? total / double(replicas) : 0.0;
}

std::uint64_t EtaCount::count_eta_at_least(std::uint64_t k) const {
    std::uint64_t total = 0;
    for (std::size_t j = static_cast<std::size_t>(k); j < eta.size(); ++j) total += eta[j];
    return total;
}

double EtaCount::p_eta_at_least(std::uint64_t k) const {
    return replicas ? double(count_eta_at_least(k)) / double(replicas) : 0.0;
}

double EtaCount::eta_hat_bound() const { return (b - a) / std::sqrt(std::numbers::pi * t); }

EtaCount eta_counts(const ModelParams& params, double delta, double t0, double t, double a, double b,
                    std::uint64_t replicas, const RunOptions& options, double guard) {
    require_replicas(replicas);
    if (!(t > 0.0)) throw std::invalid_argument("eta_counts: t must be positive");
    if (!(b > a)) throw std::invalid_argument("eta_counts: need b > a");
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("eta_counts: delta must lie in (0,1]");
    const double sigma = sigma_of(params);
    const double h = delta * delta;
    const auto start = static_cast<std::int64_t>(std::llround(t0 / h));
    const auto steps = static_cast<std::int64_t>(std::llround((t0 + t) / h)) - start;
    const double scale = sigma / delta; // rescaled -> lattice
    const auto seg_lo = static_cast<std::int64_t>(std::ceil(a * scale));
    const auto seg_hi = static_cast<std::int64_t>(std::floor(b * scale));
    const double g = guard * std::sqrt(t);
    const auto line_lo = static_cast<std::int64_t>(std::floor((a - g) * scale));
    const auto line_hi = static_cast<std::int64_t>(std::ceil((b + g) * scale));
    const double open_lo = a * scale;
    const double open_hi = b * scale;
    const EnvOracle base(params);

    struct Counts {
        std::uint64_t eta = 0;
        std::uint64_t eta_hat = 0;
    };
    const auto counts = run_replicas(replicas, options.workers, [&](std::size_t i) {
        const EnvOracle oracle = base.with_seed(derive_replica_seed(params.seed, i));
        const std::int64_t radius = oracle.scan_radius();
        // (position, carries a walker born on the segment)
        std::vector<std::pair<std::int64_t, bool>> row;
        for (std::int64_t x = line_lo; x <= line_hi; ++x) row.emplace_back(x, x >= seg_lo && x <= seg_hi);
        std::vector<std::pair<std::int64_t, bool>> merged;
        for (std::int64_t n = 0; n < steps; ++n) {
            for (auto& e : row) e.first = step(oracle, Site{e.first, start + n}, radius).x;
            std::sort(row.begin(), row.end());
            merged.clear();
            for (const auto& e : row) {
                if (!merged.empty() && merged.back().first == e.first) merged.back().second |= e.second;
                else merged.push_back(e);
            }
            row.swap(merged);
        }
        Counts c;
        for (const auto& [x, marked] : row) {
            if (marked) ++c.eta;
            if (double(x) > open_lo && double(x) < open_hi) ++c.eta_hat;
        }
        return c;
    });

    EtaCount out;
    out.t0 = t0;
    out.t = t;
    out.a = a;
    out.b = b;
    out.delta = delta;
    out.replicas = replicas;
    out.segment_sites = std::max<std::int64_t>(0, seg_hi - seg_lo + 1);
    for (const Counts& c : counts) {
        if (out.eta.size() <= c.eta) out.eta.resize(c.eta + 1, 0);
        if (out.eta_hat.size() <= c.eta_hat) out.eta_hat.resize(c.eta_hat + 1, 0);
        ++out.eta[c.eta];
        ++out.eta_hat[c.eta_hat];
    }
    return out;
}

Interval p00_bounds(const ModelParams& params) {
    params.validate();
    const int r = params.min_rank();
    const double qr = params.q_at(r);
    const double p = params.p;
    const double upper = 1.0 - 0.5 * qr * qr * std::pow(p, 3.0 * r);
    const double lower = std::min(0.5 * qr * qr * std::pow(p, 2.5 * r), 0.25 * qr * qr * std::pow(p, 2.0 * r));
    return {lower, upper};
}

EstimateSeries crossing_coalesce_prob(const ModelParams& params, const std::vector<std::int64_t>& m_grid) {
    if (m_grid.empty()) throw std::invalid_argument("crossing_coalesce_prob: empty grid");
    EstimateSeries out;
    out.name = "crossing";
    out.grid_label = "m";
    double inf = std::numeric_limits<double>::infinity();
    double inf_low = inf;
    double argmin = 0.0;
    for (std::int64_t m : m_grid) {
        if (m < 1) throw std::invalid_argument("crossing_coalesce_prob: m must be >= 1");
        const JointStepLaw law = joint_step_law(params, m);
        const double eq = law.meet();
        const double le = eq + law.cross();
        const double eps = law.truncation_bound;
        if (le <= eps)
            throw ConditioningEmptyError("crossing_coalesce_prob: P(Z^m_1 <= Z^0_1) vanishes within truncation at m = " +
                                         std::to_string(m));
        const double est = eq / le;
        out.rows.push_back({double(m), est, eq / (le + eps), std::min(1.0, (eq + eps) / le), 0});
        if (est < inf) {
            inf = est;
            argmin = double(m);
        }
        inf_low = std::min(inf_low, out.rows.back().ci_low);
    }
    out.derived["inf"] = inf;
    out.derived["inf_ci_low"] = inf_low;
    out.derived["argmin"] = argmin;
    return out;
}

EstimateSeries p00_probe(const ModelParams& params, const std::vector<std::int64_t>& m_grid) {
    if (m_grid.empty()) throw std::invalid_argument("p00_probe: empty grid");
    EstimateSeries out;
    out.name = "p00";
    out.grid_label = "m";
    double sup = -1.0;
    double argmax = 0.0;
    for (std::int64_t m : m_grid) {
        if (m < 1) throw std::invalid_argument("p00_probe: m must be >= 1");
        const JointStepLaw law = joint_step_law(params, m);
        const double v = law.unchanged();
        out.rows.push_back({double(m), v, std::max(0.0, v), std::min(1.0, v + law.truncation_bound), 0});
        if (v > sup) {
            sup = v;
            argmax = double(m);
        }
    }
    const Interval bounds = p00_bounds(params);
    out.derived["sup"] = sup;
    out.derived["argmax"] = argmax;
    out.derived["lower_bound"] = bounds.low;
    out.derived["upper_bound"] = bounds.high;
    out.derived["r"] = double(params.min_rank());
    return out;
}

namespace {

struct JointCounts {
    std::uint64_t meet = 0;
    std::uint64_t cross = 0;
    std::uint64_t unchanged = 0;
};

std::vector<JointCounts> joint_step_mc(const ModelParams& params, const std::vector<std::int64_t>& m_grid,
                                       std::uint64_t replicas, const RunOptions& options) {
    require_replicas(replicas);
    const EnvOracle base(params);
    const auto per_replica = run_replicas(replicas, options.workers, [&](std::size_t i) {
        const EnvOracle oracle = base.with_seed(derive_replica_seed(params.seed, i));
        const std::int64_t z0 = step(oracle, Site{0, 0}).x;
        std::vector<std::int8_t> code;
        code.reserve(m_grid.size());
        for (std::int64_t m : m_grid) {
            const std::int64_t zm = step(oracle, Site{m, 0}).x;
            const std::int64_t gap = zm - z0;
            code.push_back(gap == 0 ? 1 : gap < 0 ? 2 : gap == m ? 3 : 0);
        }
        return code;
    });
    std::vector<JointCounts> out(m_grid.size());
    for (const auto& codes : per_replica)
        for (std::size_t j = 0; j < codes.size(); ++j) {
            if (codes[j] == 1) ++out[j].meet;
            if (codes[j] == 2) ++out[j].cross;
            if (codes[j] == 3) ++out[j].unchanged;
        }
    return out;
}

} // namespace

EstimateSeries crossing_coalesce_prob_mc(const ModelParams& params, const std::vector<std::int64_t>& m_grid,
                                         std::uint64_t replicas, const RunOptions& options) {
    const auto counts = joint_step_mc(params, m_grid, replicas, options);
    EstimateSeries out;
    out.name = "crossing_mc";
    out.grid_label = "m";
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m_grid.size(); ++j) {
        const std::uint64_t le = counts[j].meet + counts[j].cross;
        if (le == 0)
            throw ConditioningEmptyError("crossing_coalesce_prob_mc: no replica met or crossed at m = " +
                                         std::to_string(m_grid[j]));
        out.rows.push_back(proportion_row(double(m_grid[j]), counts[j].meet, le, options.confidence));
        inf = std::min(inf, out.rows.back().estimate);
    }
    out.derived["inf"] = inf;
    return out;
}

EstimateSeries p00_probe_mc(const ModelParams& params, const std::vector<std::int64_t>& m_grid,
                            std::uint64_t replicas, const RunOptions& options) {
    const auto counts = joint_step_mc(params, m_grid, replicas, options);
    EstimateSeries out;
    out.name = "p00_mc";
    out.grid_label = "m";
    double sup = 0.0;
    for (std::size_t j = 0; j < m_grid.size(); ++j) {
        out.rows.push_back(proportion_row(double(m_grid[j]), counts[j].unchanged, replicas, options.confidence));
        sup = std::max(sup, out.rows.back().estimate);
    }
    out.derived["sup"] = sup;
    return out;
}

EstimateSeries density_curve(const ModelParams& params, std::int64_t L, const std::vector<std::int64_t>& t_grid,
                             std::uint64_t replicas, const RunOptions& options) {
    require_replicas(replicas);
    if (t_grid.empty()) throw std::invalid_argument("density_curve: empty time grid");
    std::vector<std::int64_t> sorted = t_grid;
    if (!std::is_sorted(sorted.begin(), sorted.end())) throw std::invalid_argument("density_curve: grid must ascend");
    const EnvOracle base(params);
    const auto curves = run_replicas(replicas, options.workers, [&](std::size_t i) {
        return occupied_density_curve(base.with_seed(derive_replica_seed(params.seed, i)), L, sorted);
    });
    const double z = normal_quantile(0.5 + 0.5 * options.confidence);
    EstimateSeries out;
    out.name = "density";
    out.grid_label = "t";
    std::vector<double> scaled;
    for (std::size_t j = 0; j < sorted.size(); ++j) {
        std::vector<double> v;
        v.reserve(replicas);
        for (const auto& c : curves) v.push_back(c[j]);
        const MeanEstimate m = mean_estimate(v);
        out.rows.push_back({double(sorted[j]), m.mean, std::max(0.0, m.mean - z * m.stderr_),
                            std::min(1.0, m.mean + z * m.stderr_), replicas});
        if (sorted[j] > 0) scaled.push_back(std::sqrt(double(sorted[j])) * m.mean);
    }
    out.derived["L"] = double(L);
    if (!scaled.empty()) {
        out.derived["flatness"] = max_min_ratio(scaled);
        out.derived["c_density"] = *std::max_element(scaled.begin(), scaled.end());
    }
    return out;
}

EstimateSeries separation_exit_frequency(const ModelParams& params, std::int64_t k, double u, double t,
                                         const std::vector<double>& delta_grid, std::uint64_t replicas,
                                         const RunOptions& options) {
    require_replicas(replicas);
    const EnvOracle base(params);
    EstimateSeries out;
    out.name = "separation_exit";
    out.grid_label = "delta";
    std::vector<double> lx;
    std::vector<double> ly;
    for (double delta : delta_grid) {
        const double level = u / delta;
        const auto horizon = static_cast<std::int64_t>(std::floor(t / (delta * delta)));
        const auto hits = run_replicas(replicas, options.workers, [&](std::size_t i) -> int {
            const EnvOracle oracle = base.with_seed(derive_replica_seed(params.seed, i));
            const std::int64_t radius = oracle.scan_radius();
            Site a{0, 0};
            Site b{k, 0};
            for (std::int64_t n = 0; n < horizon; ++n) {
                const std::int64_t y = b.x - a.x;
                if (double(y) >= level) return 1;
                if (y == 0) return 0;
                a = step(oracle, a, radius);
                b = step(oracle, b, radius);
            }
            return 0;
        });
        std::uint64_t count = 0;
        for (int hit : hits) count += static_cast<std::uint64_t>(hit);
        out.rows.push_back(proportion_row(delta, count, replicas, options.confidence));
        if (count > 0) {
            lx.push_back(std::log(delta));
            ly.push_back(std::log(out.rows.back().estimate));
        }
    }
    if (lx.size() >= 2) {
        double mx = 0.0;
        double my = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= double(lx.size());
        my /= double(lx.size());
        double sxy = 0.0;
        double sxx = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        out.derived["loglog_slope"] = sxy / sxx;
    }
    return out;
}

} // namespace gdnm
