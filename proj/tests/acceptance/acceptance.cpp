// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "gdnm/embedding.hpp"
#include "gdnm/experiment.hpp"
#include "gdnm/kernel.hpp"
#include "gdnm/mathutil.hpp"
#include "gdnm/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace gdnm;
namespace fs = std::filesystem;

namespace {

ModelParams model(double p, std::vector<std::pair<int, double>> q, std::uint64_t seed) {
    ModelParams m;
    m.p = p;
    m.q = std::move(q);
    m.seed = seed;
    return m;
}

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [x]");
    }
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string fmt(const char* f, double a, double b) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

const std::vector<ModelParams>& parameter_sets() {
    static const std::vector<ModelParams> sets{
        model(0.5, {{1, 1.0}}, 101),
        model(0.5, {{1, 0.5}, {2, 0.5}}, 102),
        model(0.3, {{1, 0.2}, {3, 0.8}}, 103),
    };
    return sets;
}

std::string label(const ModelParams& m) {
    std::ostringstream s;
    s << "p=" << m.p << " q={";
    for (std::size_t i = 0; i < m.q.size(); ++i) s << (i ? "," : "") << m.q[i].first << ":" << m.q[i].second;
    s << "}";
    return s.str();
}

Outcome increment_law_agreement() {
    Outcome out;
    const std::uint64_t n = 1'000'000;
    for (const ModelParams& params : parameter_sets()) {
        const IncrementLaw law = increment_pmf_enumerated(params);
        const EnvOracle env(params);
        std::map<std::int64_t, std::uint64_t> counts;
        // One step per row: rows are independent, so the draws are too.
        for (std::uint64_t t = 0; t < n; ++t) ++counts[step(env, Site{0, std::int64_t(t)}).x];
        double worst = 0.0;
        bool ok = true;
        for (std::int64_t z = -law.radius; z <= law.radius; ++z) {
            const double pz = law.at(z);
            if (pz <= 1e-4) continue;
            const double freq = double(counts[z]) / double(n);
            const double band = 3.0 * std::sqrt(pz * (1 - pz) / double(n));
            worst = std::max(worst, std::abs(freq - pz) / band);
            ok = ok && std::abs(freq - pz) <= band;
        }
        out.require(ok, label(params) + fmt(" worst |f-p|/3sd=%.3f", worst));
        if (params.q.size() == 1 && params.q[0].first == 1)
            out.require(std::abs(law.at(0) - params.p) <= 1e-12, fmt("pmf(0)=%.15g", law.at(0)));
    }
    return out;
}

Outcome sigma2_consistency() {
    Outcome out;
    const ModelParams params = model(0.5, {{1, 1.0}}, 201);
    // pmf(z) = (3/4) 4^-|z| for z != 0 and sum_{z>=1} z^2 x^z = x (1 + x) / (1 - x)^3.
    const double oracle = 2.0 * 0.75 * (0.25 * 1.25 / std::pow(0.75, 3));
    const double sigma2 = increment_pmf_enumerated(params).sigma2;
    out.require(std::abs(sigma2 - oracle) <= 1e-6 && std::abs(oracle - 10.0 / 9.0) <= 1e-15,
                fmt("kernel sigma2=%.12f oracle=%.12f", sigma2, oracle));
    const EstimateSeries s = joint_marginal_check(params, 300, {1.0}, 10'000);
    const double var = s.derived.at("variance@1");
    out.require(std::abs(var / sigma2 - 1.0) <= 0.05, fmt("Var(X_{n^2})/n^2=%.4f rel err=%.4f", var, var / sigma2 - 1));
    return out;
}

Outcome tail_scaling() {
    Outcome out;
    const ModelParams params = model(0.5, {{1, 0.5}, {2, 0.5}}, 301);
    const auto start = std::chrono::steady_clock::now();
    const EstimateSeries s = tail_curve(params, 1, {64, 256, 1024, 4096}, 100'000);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const double flat = s.derived.at("flatness");
    std::string rows;
    for (const auto& r : s.rows) rows += fmt(" %.0f:%.4f", r.grid, std::sqrt(r.grid) * r.estimate);
    out.require(flat <= 1.5, fmt("flatness=%.4f", flat) + " sqrt(t)P=" + rows);
    out.require(seconds <= 600.0, fmt("runtime=%.1fs", seconds));
    return out;
}

Outcome density_scaling() {
    Outcome out;
    const std::vector<std::int64_t> grid{16, 64, 256};
    // Walkers start on [-L, L] and are counted on [-L/2, L/2]: L = 8 sqrt(tmax).
    const std::int64_t L = std::int64_t(std::ceil(8.0 * std::sqrt(256.0)));
    for (const ModelParams& params : {parameter_sets()[0], parameter_sets()[1]}) {
        const EstimateSeries s = density_curve(params, L, grid, 200);
        std::string rows;
        for (const auto& r : s.rows) rows += fmt(" %.0f:%.4f", r.grid, std::sqrt(r.grid) * r.estimate);
        out.require(s.derived.at("flatness") <= 1.5,
                    label(params) + fmt(" flatness=%.4f", s.derived.at("flatness")) + " sqrt(t)d=" + rows);
    }
    return out;
}

Outcome pairwise_condition_i() {
    Outcome out;
    const ModelParams params = model(0.5, {{1, 1.0}}, 501);
    auto check = [&](const EstimateSeries& s, double d) {
        for (std::size_t i = 0; i < s.rows.size(); ++i) {
            const double err = std::abs(s.rows[i].estimate - s.reference[i]);
            out.require(err <= 0.05, fmt("(d=%.0f,t=%.0f) ", d, s.rows[i].grid) +
                                         fmt("P=%.4f ref=%.4f", s.rows[i].estimate, s.reference[i]));
        }
    };
    check(pair_meeting_cdf(params, 1.0, {1.0, 4.0}, 500, 10'000), 1.0);
    check(pair_meeting_cdf(params, 2.0, {1.0}, 500, 10'000), 2.0);
    return out;
}

// eta_hat is a histogram: eta_hat[k] replicas counted k points.
double stderr_of_eta_hat(const EtaCount& e) {
    const double mean = e.mean_eta_hat();
    double ss = 0.0;
    for (std::size_t k = 0; k < e.eta_hat.size(); ++k) ss += double(e.eta_hat[k]) * std::pow(double(k) - mean, 2);
    const double n = double(e.replicas);
    return std::sqrt(ss / (n - 1) / n);
}

Outcome condition_e() {
    Outcome out;
    const std::vector<double> deltas{1.0 / 16, 1.0 / 32, 1.0 / 64};
    for (const ModelParams& params : {parameter_sets()[0], parameter_sets()[1]}) {
        std::vector<double> gap, se;
        double bound = 0.0, last_mean = 0.0;
        std::string rows;
        for (double delta : deltas) {
            const EtaCount e = eta_counts(params, delta, 0.0, 1.0, 0.0, 1.0, 1000);
            bound = e.eta_hat_bound();
            last_mean = e.mean_eta_hat();
            gap.push_back(std::abs(last_mean - bound));
            se.push_back(stderr_of_eta_hat(e));
            rows += fmt(" 1/%.0f:%.4f", 1.0 / delta, last_mean);
        }
        out.require(last_mean <= 1.15 * bound, label(params) + fmt(" bound=%.4f", bound) + " mean eta-hat=" + rows);
        // The distance to the bound must not grow beyond noise as delta halves.
        bool approaching = true;
        for (std::size_t i = 1; i < gap.size(); ++i)
            approaching = approaching && gap[i] <= gap[i - 1] + 3.0 * std::hypot(se[i], se[i - 1]);
        out.require(approaching, "gap nonincreasing within 3 combined se");
    }
    return out;
}

Outcome condition_b1() {
    Outcome out;
    for (const ModelParams& params : {parameter_sets()[0], parameter_sets()[1]}) {
        std::vector<double> p;
        std::string rows;
        for (double eps : {0.4, 0.2, 0.1}) {
            const EtaCount e = eta_counts(params, 1.0 / 64, 0.0, 1.0, 0.0, eps, 1000);
            p.push_back(e.p_eta_at_least(2));
            rows += fmt(" %.1f:%.4f", eps, p.back());
        }
        out.require(p[1] < p[0] && p[2] < p[1], label(params) + " P(eta>=2)=" + rows);
    }
    return out;
}

Outcome p00_bracket() {
    Outcome out;
    std::vector<std::int64_t> grid;
    for (std::int64_t m = 1; m <= 20; ++m) grid.push_back(m);
    for (const ModelParams& params : {parameter_sets()[0], parameter_sets()[1]}) {
        const EstimateSeries s = p00_probe(params, grid);
        const double sup = s.derived.at("sup");
        const double lo = s.derived.at("lower_bound"), hi = s.derived.at("upper_bound");
        out.require(sup >= lo && sup <= hi, label(params) + fmt(" sup=%.6f in [%.6f, %.6f]", sup, lo, hi));
    }
    return out;
}

Outcome crossing_positive() {
    Outcome out;
    std::vector<std::int64_t> grid;
    for (std::int64_t m = 1; m <= 20; ++m) grid.push_back(m);
    const ModelParams params = parameter_sets()[1];
    const EstimateSeries s = crossing_coalesce_prob(params, grid);
    out.require(s.derived.at("inf_ci_low") > 0.0, fmt("inf=%.6f ci_low=%.6f at m=%.0f", s.derived.at("inf"),
                                                     s.derived.at("inf_ci_low"), s.derived.at("argmin")));
    return out;
}

IntegerPmf as_pmf(const IncrementLaw& law) {
    IntegerPmf pmf;
    double total = 0.0;
    for (std::int64_t z = -law.radius; z <= law.radius; ++z) total += law.at(z);
    for (std::int64_t z = -law.radius; z <= law.radius; ++z)
        if (law.at(z) > 0.0) pmf[z] = law.at(z) / total;
    return pmf;
}

Outcome skorohod_embedding() {
    Outcome out;
    double worst_push = 0.0, worst_tv = 0.0;
    for (const ModelParams& params : parameter_sets()) {
        const IntegerPmf pmf = as_pmf(increment_pmf_enumerated(params));
        const PairLaw law = skorohod_pair_law(pmf);
        worst_push = std::max(worst_push, law.pushforward_error(pmf));
        CounterRng rng(params.seed);
        const std::uint64_t n = 1'000'000;
        std::map<std::int64_t, double> diff;
        for (const auto& [z, w] : pmf) diff[z] -= w;
        for (std::uint64_t i = 0; i < n; ++i) diff[embed_one_step(law, rng)] += 1.0 / double(n);
        double tv = 0.0;
        for (const auto& [z, d] : diff) tv += std::abs(d);
        worst_tv = std::max(worst_tv, 0.5 * tv);
    }
    out.require(worst_push <= 1e-10, fmt("pushforward max err=%.3g", worst_push));
    const std::vector<std::pair<double, double>> grid{{-1, 1}, {-3, 1}, {-2, 3}, {-1, 4}, {-5, 2}};
    bool means_ok = true;
    double worst_z = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const auto [u, v] = grid[i];
        CounterRng rng(1000 + i);
        std::vector<double> times(100'000);
        for (double& t : times) t = exit_time_sample(u, v, rng);
        const MeanEstimate m = mean_estimate(times);
        const double z = std::abs(m.mean + u * v) / m.stderr_;
        worst_z = std::max(worst_z, z);
        means_ok = means_ok && z <= 3.0;
    }
    out.require(means_ok, fmt("E[T]=-uv worst |z|=%.3f over 5 (u,v)", worst_z));
    out.require(worst_tv <= 0.005, fmt("embed TV max=%.5f", worst_tv));
    return out;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    Outcome out;
    const fs::path root = fs::temp_directory_path() / "gdnm_acceptance_determinism";
    fs::remove_all(root);
    const std::string text = "model:\n  p: 0.5\n  q: {1: 0.5, 2: 0.5}\n  seed: 1101\nreplicas: 2000\n"
                             "tail:\n  t: [0, 64, 256]\npair:\n  n: 50\n";
    for (const std::string experiment : {"tail", "pair", "density"}) {
        ExperimentConfig config = parse_config(experiment, text);
        std::vector<std::string> csv;
        for (const auto& [dir, workers] : std::vector<std::pair<std::string, unsigned>>{{"a", 1}, {"b", 1}, {"c", 8}}) {
            config.out_dir = root / dir;
            const RunReport r = run_and_write(config, workers);
            if (r.status != 0) {
                out.require(false, experiment + ": " + r.message);
                break;
            }
            csv.push_back(slurp(config.out_dir / (output_stem(config) + ".csv")));
        }
        if (csv.size() == 3)
            out.require(!csv[0].empty() && csv[0] == csv[1] && csv[0] == csv[2],
                        experiment + " csv identical at workers 1,1,8");
    }
    return out;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"increment law oracle agreement", increment_law_agreement},
        {"sigma^2 consistency", sigma2_consistency},
        {"coalescence tail scaling", tail_scaling},
        {"density scaling", density_scaling},
        {"pairwise coalescing limit", pairwise_condition_i},
        {"eta-hat bound", condition_e},
        {"eta >= 2 trend", condition_b1},
        {"p00 bracket", p00_bracket},
        {"crossing then coalesce positivity", crossing_positive},
        {"Skorohod embedding", skorohod_embedding},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s %2zu %s (%.1fs): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), sec,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
