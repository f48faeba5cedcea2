#include "gdnm/experiment.hpp"

#include "gdnm/embedding.hpp"
#include "gdnm/joint_step.hpp"
#include "gdnm/kernel.hpp"
#include "gdnm/replica.hpp"
#include "gdnm/series_io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#ifndef GDNM_VERSION
#define GDNM_VERSION "unknown"
#endif

namespace gdnm {

std::string code_version() { return GDNM_VERSION; }

namespace {

using Section = std::map<std::string, std::vector<double>>;

std::vector<double> range(double lo, double hi) {
    std::vector<double> out;
    for (double v = lo; v <= hi; v += 1.0) out.push_back(v);
    return out;
}

const std::map<std::string, Section>& defaults_table() {
    static const std::map<std::string, Section> table{
        {"increment", {{"zmax", {10}}, {"window", {0}}}},
        {"tail", {{"k", {1}}, {"t", {0, 64, 256, 1024, 4096}}}},
        {"density", {{"L", {0}}, {"t", {16, 64, 256}}}},
        {"pair", {{"d", {1}}, {"t", {1, 4}}, {"n", {500}}}},
        {"donsker", {{"n", {300}}, {"s", {0.25, 0.5, 1}}}},
        {"boxexit", {{"u", {1}}, {"t", {0.1, 0.2, 0.4}}, {"C_box", {3}}, {"delta", {1.0 / 64}}}},
        {"eta",
         {{"delta", {1.0 / 16, 1.0 / 32, 1.0 / 64}},
          {"a", {0}},
          {"b", {1}},
          {"t0", {0}},
          {"t", {1}},
          {"guard", {4}}}},
        {"crossing", {{"m", range(1, 20)}, {"monte_carlo", {0}}}},
        {"p00", {{"m", range(1, 20)}, {"monte_carlo", {0}}}},
        {"embed", {{"exit_samples", {10000}}, {"u", {-1, -3, -2, -1, -5}}, {"v", {1, 1, 3, 4, 2}}}},
    };
    return table;
}

// Accepts plain numbers and simple fractions such as "1/64".
double parse_number(const YAML::Node& node, const std::string& field) {
    const std::string text = node.Scalar();
    const auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return node.as<double>();
        std::size_t used = 0;
        const std::string num = text.substr(0, slash);
        const std::string den = text.substr(slash + 1);
        const double a = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument(text);
        const double b = std::stod(den, &used);
        if (used != den.size()) throw std::invalid_argument(text);
        return a / b;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected a number, got '" + text + "'");
    }
}

std::uint64_t parse_count(const YAML::Node& node, const std::string& field) {
    const double v = parse_number(node, field);
    if (!(v >= 0.0) || v != std::floor(v) || v > 1.8e19) throw ConfigError(field, "expected a nonnegative integer");
    return static_cast<std::uint64_t>(v);
}

ModelParams parse_model(const YAML::Node& node) {
    if (!node) throw ConfigError("model", "missing model block");
    if (!node.IsMap()) throw ConfigError("model", "expected a mapping");
    ModelParams params;
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (key != "p" && key != "q" && key != "seed") throw ConfigError("model." + key, "unknown key");
    }
    if (!node["p"]) throw ConfigError("model.p", "missing");
    params.p = parse_number(node["p"], "model.p");
    const YAML::Node q = node["q"];
    params.q.clear();
    if (!q) throw ConfigError("model.q", "missing");
    if (q.IsMap()) {
        for (const auto& kv : q) {
            const double rank = parse_number(kv.first, "model.q");
            if (rank != std::floor(rank) || rank < -2e9 || rank > 2e9)
                throw ConfigError("model.q", "rank must be an integer");
            params.q.emplace_back(static_cast<int>(rank), parse_number(kv.second, "model.q"));
        }
    } else if (q.IsSequence()) {
        for (const auto& e : q) {
            if (!e.IsSequence() || e.size() != 2) throw ConfigError("model.q", "expected [rank, probability] pairs");
            const double rank = parse_number(e[0], "model.q");
            if (rank != std::floor(rank)) throw ConfigError("model.q", "rank must be an integer");
            params.q.emplace_back(static_cast<int>(rank), parse_number(e[1], "model.q"));
        }
    } else {
        throw ConfigError("model.q", "expected a mapping from rank to probability");
    }
    if (node["seed"]) params.seed = parse_count(node["seed"], "model.seed");
    params.validate();
    return params;
}

double confidence_z(double confidence) { return normal_quantile(0.5 + 0.5 * confidence); }

std::vector<std::int64_t> as_ints(const std::vector<double>& v, const std::string& field) {
    std::vector<std::int64_t> out;
    for (double x : v) {
        if (x != std::floor(x)) throw ConfigError(field, "expected integers");
        out.push_back(static_cast<std::int64_t>(x));
    }
    return out;
}

ExperimentResult run_increment(const ExperimentConfig& c) {
    const auto zmax = static_cast<std::int64_t>(c.value("zmax"));
    const auto window = static_cast<std::int64_t>(c.value("window"));
    if (zmax < 0) throw ConfigError("increment.zmax", "must be >= 0");
    const IncrementLaw law = window > 0 ? increment_pmf_enumerated(c.model, window) : increment_pmf_enumerated(c.model);
    const IncrementLaw paper = increment_pmf_paper_form(c.model, std::max<std::int64_t>(zmax, 1));
    ExperimentResult r;
    auto& s = r.series;
    s.name = "increment";
    s.grid_label = "z";
    for (std::int64_t z = -zmax; z <= zmax; ++z) {
        const double v = law.at(z);
        s.rows.push_back({double(z), v, v, std::min(1.0, v + law.truncation_bound), 0});
        s.reference.push_back(paper.at(z));
    }
    s.derived["sigma2"] = law.sigma2;
    s.derived["truncation_bound"] = law.truncation_bound;
    s.derived["paper_form_mass_deficit"] = paper.truncation_bound;
    for (const auto& m : moments(law, {1, 2, 3, 4})) {
        s.derived["abs_moment_" + std::to_string(m.order)] = m.value;
        s.derived["abs_moment_" + std::to_string(m.order) + "_error"] = m.error_bound;
    }
    return r;
}

ExperimentResult run_eta(const ExperimentConfig& c, const RunOptions& opts) {
    const double a = c.value("a");
    const double b = c.value("b");
    const double t0 = c.value("t0");
    const double t = c.value("t");
    const double guard = c.value("guard");
    const double z = confidence_z(c.confidence);
    ExperimentResult r;
    r.style = PlotStyle::Eta;
    auto& s = r.series;
    s.name = "eta";
    s.grid_label = "delta";
    nlohmann::json per_delta = nlohmann::json::array();
    for (double delta : c.values("delta")) {
        const EtaCount e = eta_counts(c.model, delta, t0, t, a, b, c.replicas, opts, guard);
        std::vector<double> values;
        for (std::size_t k = 0; k < e.eta_hat.size(); ++k)
            values.insert(values.end(), e.eta_hat[k], double(k));
        const MeanEstimate m = mean_estimate(values);
        s.rows.push_back({delta, m.mean, m.mean - z * m.stderr_, m.mean + z * m.stderr_, e.replicas});
        s.derived["bound"] = e.eta_hat_bound();
        per_delta.push_back({{"delta", delta},
                             {"mean_eta_hat", e.mean_eta_hat()},
                             {"mean_eta", e.mean_eta()},
                             {"p_eta_ge_2", e.p_eta_at_least(2)},
                             {"p_eta_ge_3", e.p_eta_at_least(3)},
                             {"segment_sites", e.segment_sites},
                             {"eta_histogram", e.eta},
                             {"eta_hat_histogram", e.eta_hat}});
    }
    r.extra["eta"] = per_delta;
    return r;
}

ExperimentResult run_embed(const ExperimentConfig& c, const RunOptions& opts) {
    const IncrementLaw law = increment_pmf_enumerated(c.model);
    IntegerPmf pmf;
    double total = 0.0;
    for (std::int64_t z = -law.radius; z <= law.radius; ++z)
        if (law.at(z) > 1e-15) total += law.at(z);
    for (std::int64_t z = -law.radius; z <= law.radius; ++z)
        if (law.at(z) > 1e-15) pmf[z] = law.at(z) / total;
    const PairLaw pair = skorohod_pair_law(pmf);

    // Draws in fixed blocks so the result does not depend on the worker count.
    constexpr std::uint64_t kBlock = 10000;
    const std::uint64_t draws = c.replicas;
    const std::uint64_t blocks = (draws + kBlock - 1) / kBlock;
    const auto histograms = run_replicas(blocks, opts.workers, [&](std::size_t i) {
        CounterRng rng(derive_replica_seed(c.model.seed, i));
        const std::uint64_t count = std::min<std::uint64_t>(kBlock, draws - i * kBlock);
        std::map<std::int64_t, std::uint64_t> h;
        for (std::uint64_t j = 0; j < count; ++j) ++h[embed_one_step(pair, rng)];
        return h;
    });
    std::map<std::int64_t, std::uint64_t> hist;
    for (const auto& h : histograms)
        for (const auto& [z, n] : h) hist[z] += n;

    ExperimentResult r;
    auto& s = r.series;
    s.name = "embed";
    s.grid_label = "z";
    double tv = 0.0;
    std::set<std::int64_t> support;
    for (const auto& [z, w] : pmf) support.insert(z);
    for (const auto& [z, n] : hist) support.insert(z);
    for (std::int64_t z : support) {
        const std::uint64_t hits = hist.contains(z) ? hist[z] : 0;
        const double target = pmf.contains(z) ? pmf[z] : 0.0;
        tv += std::abs(double(hits) / double(draws) - target);
        if (target < 1e-6 && hits == 0) continue;
        const Interval ci = wilson_interval(hits, draws, c.confidence);
        s.rows.push_back({double(z), double(hits) / double(draws), ci.low, ci.high, draws});
        s.reference.push_back(target);
    }
    s.derived["tv_distance"] = 0.5 * tv;
    s.derived["pushforward_error"] = pair.pushforward_error(pmf);
    s.derived["pair_mass"] = pair.total_mass();

    const auto us = c.values("u");
    const auto vs = c.values("v");
    if (us.size() != vs.size()) throw ConfigError("embed.u", "u and v must have the same length");
    const auto samples = static_cast<std::uint64_t>(c.value("exit_samples"));
    nlohmann::json exits = nlohmann::json::array();
    if (samples > 0) {
        for (std::size_t j = 0; j < us.size(); ++j) {
            const double u = us[j];
            const double v = vs[j];
            if (!(u < 0.0 && v > 0.0)) throw ConfigError("embed.u", "need u < 0 < v");
            const std::uint64_t stream = derive_replica_seed(c.model.seed ^ 0x5851f42d4c957f2dULL, j);
            const std::uint64_t eblocks = (samples + 999) / 1000;
            const auto times = run_replicas(eblocks, opts.workers, [&](std::size_t i) {
                CounterRng rng(derive_replica_seed(stream, i));
                const std::uint64_t count = std::min<std::uint64_t>(1000, samples - i * 1000);
                std::vector<double> ts;
                for (std::uint64_t k = 0; k < count; ++k) ts.push_back(exit_time_sample(u, v, rng));
                return ts;
            });
            std::vector<double> all;
            for (const auto& ts : times) all.insert(all.end(), ts.begin(), ts.end());
            const MeanEstimate m = mean_estimate(all);
            exits.push_back({{"u", u},
                             {"v", v},
                             {"mean_exit_time", m.mean},
                             {"stderr", m.stderr_},
                             {"expected", -u * v},
                             {"z_score", m.stderr_ > 0 ? (m.mean + u * v) / m.stderr_ : 0.0}});
        }
    }
    r.extra["exit_time_check"] = exits;
    return r;
}

} // namespace

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& [k, v] : defaults_table()) out.push_back(k);
        return out;
    }();
    return names;
}

const std::map<std::string, std::vector<double>>& experiment_defaults(const std::string& experiment) {
    const auto& table = defaults_table();
    const auto it = table.find(experiment);
    if (it == table.end()) throw ConfigError("experiment", "unknown experiment '" + experiment + "'");
    return it->second;
}

const std::vector<double>& ExperimentConfig::values(const std::string& key) const {
    if (const auto it = grid.find(key); it != grid.end()) return it->second;
    const auto& d = experiment_defaults(experiment);
    if (const auto it = d.find(key); it != d.end()) return it->second;
    throw ConfigError(experiment + "." + key, "no such parameter");
}

double ExperimentConfig::value(const std::string& key) const {
    const auto& v = values(key);
    if (v.size() != 1) throw ConfigError(experiment + "." + key, "expected a single value");
    return v.front();
}

ExperimentConfig parse_config(const std::string& experiment, const std::string& yaml_text) {
    ExperimentConfig c;
    c.experiment = experiment;
    c.source = yaml_text;
    const auto& defaults = experiment_defaults(experiment);
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("config", std::string("YAML parse error: ") + e.what());
    }
    if (!root.IsMap()) throw ConfigError("config", "expected a mapping at top level");

    try {
        c.model = parse_model(root["model"]);
        if (root["replicas"]) c.replicas = parse_count(root["replicas"], "replicas");
        if (c.replicas < 1) throw ConfigError("replicas", "must be >= 1");
        if (root["out"]) c.out_dir = root["out"].as<std::string>();
        if (root["plot"]) c.plot = root["plot"].as<bool>();
        if (root["name"]) c.name = root["name"].as<std::string>();
        if (root["confidence"]) {
            c.confidence = parse_number(root["confidence"], "confidence");
            if (!(c.confidence > 0.0 && c.confidence < 1.0)) throw ConfigError("confidence", "must lie in (0,1)");
        }
        if (const YAML::Node section = root[experiment]) {
            if (!section.IsMap()) throw ConfigError(experiment, "expected a mapping");
            for (const auto& kv : section) {
                const auto key = kv.first.as<std::string>();
                const std::string field = experiment + "." + key;
                if (!defaults.contains(key)) throw ConfigError(field, "unknown parameter");
                std::vector<double> values;
                if (kv.second.IsSequence()) {
                    for (const auto& e : kv.second) values.push_back(parse_number(e, field));
                } else {
                    values.push_back(parse_number(kv.second, field));
                }
                if (values.empty()) throw ConfigError(field, "grid must be nonempty");
                c.grid[key] = std::move(values);
            }
        }
    } catch (const YAML::Exception& e) {
        throw ConfigError("config", std::string("bad value: ") + e.what());
    }
    return c;
}

ExperimentConfig load_config(const std::string& experiment, const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config", "cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(experiment, text.str());
}

ExperimentResult run_experiment(const ExperimentConfig& c, unsigned workers) {
    c.model.validate();
    RunOptions opts;
    opts.workers = workers;
    opts.confidence = c.confidence;
    const std::string& e = c.experiment;
    if (e == "increment") return run_increment(c);
    if (e == "eta") return run_eta(c, opts);
    if (e == "embed") return run_embed(c, opts);

    ExperimentResult r;
    if (e == "tail") {
        const auto k = static_cast<std::int64_t>(c.value("k"));
        if (k == 0) throw ConfigError("tail.k", "must be nonzero");
        r.series = tail_curve(c.model, k, as_ints(c.values("t"), "tail.t"), c.replicas, opts);
        r.style = PlotStyle::Tail;
    } else if (e == "density") {
        const auto ts = as_ints(c.values("t"), "density.t");
        auto L = static_cast<std::int64_t>(c.value("L"));
        if (L <= 0) {
            const auto tmax = *std::max_element(ts.begin(), ts.end());
            L = std::max<std::int64_t>(8, static_cast<std::int64_t>(std::ceil(8.0 * std::sqrt(double(tmax)))));
        }
        r.series = density_curve(c.model, L, ts, c.replicas, opts);
        r.style = PlotStyle::Tail;
    } else if (e == "pair") {
        r.series = pair_meeting_cdf(c.model, c.value("d"), c.values("t"), static_cast<std::int64_t>(c.value("n")),
                                    c.replicas, opts);
    } else if (e == "donsker") {
        r.series = joint_marginal_check(c.model, static_cast<std::int64_t>(c.value("n")), c.values("s"), c.replicas,
                                        opts);
    } else if (e == "boxexit") {
        r.series = box_exit_prob(c.model, c.value("u"), c.values("t"), c.value("C_box"), c.value("delta"), c.replicas,
                                 opts);
    } else if (e == "crossing") {
        const auto m = as_ints(c.values("m"), "crossing.m");
        r.series = c.value("monte_carlo") != 0.0 ? crossing_coalesce_prob_mc(c.model, m, c.replicas, opts)
                                                 : crossing_coalesce_prob(c.model, m);
    } else if (e == "p00") {
        const auto m = as_ints(c.values("m"), "p00.m");
        r.series = c.value("monte_carlo") != 0.0 ? p00_probe_mc(c.model, m, c.replicas, opts) : p00_probe(c.model, m);
    } else {
        throw ConfigError("experiment", "unknown experiment '" + e + "'");
    }
    return r;
}

std::string output_stem(const ExperimentConfig& config) {
    return (config.name.empty() ? config.experiment : config.name) + "_seed" + std::to_string(config.model.seed);
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << bytes;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

nlohmann::json model_json(const ModelParams& m) {
    nlohmann::json q = nlohmann::json::object();
    for (const auto& [rank, prob] : m.q) q[std::to_string(rank)] = prob;
    return {{"p", m.p}, {"q", q}, {"seed", m.seed}};
}

} // namespace

RunReport run_and_write(const ExperimentConfig& config, unsigned workers) {
    RunReport report;
    try {
        const auto started = std::chrono::steady_clock::now();
        const ExperimentResult result = run_experiment(config, workers);
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        std::filesystem::create_directories(config.out_dir);
        const std::string stem = output_stem(config);
        const auto csv_path = config.out_dir / (stem + ".csv");
        const auto svg_path = config.out_dir / (stem + ".svg");
        const auto summary_path = config.out_dir / (stem + ".summary.json");
        const auto manifest_path = config.out_dir / (stem + ".manifest.json");

        nlohmann::json files = nlohmann::json::array();
        const std::string csv = series_csv(result.series);
        write_file(csv_path, csv);
        files.push_back({{"path", csv_path.filename().string()}, {"sha256", sha256_hex(csv)}});
        report.files.push_back(csv_path);
        if (config.plot) {
            const std::string svg = plot(result.series, result.style);
            write_file(svg_path, svg);
            files.push_back({{"path", svg_path.filename().string()}, {"sha256", sha256_hex(svg)}});
            report.files.push_back(svg_path);
        }

        const nlohmann::json provenance{{"experiment", config.experiment},
                                        {"seed", config.model.seed},
                                        {"config_sha256", sha256_hex(config.source)},
                                        {"code_version", code_version()}};
        nlohmann::json summary = provenance;
        summary["model"] = model_json(config.model);
        summary["replicas"] = config.replicas;
        summary["workers"] = effective_workers(workers);
        summary["runtime_seconds"] = seconds;
        summary["series"] = series_to_json(result.series);
        summary["derived"] = summary["series"]["derived"];
        for (const auto& [k, v] : result.extra.items()) summary[k] = v;
        summary["manifest"] = nlohmann::json{{"files", files}};
        const std::string summary_text = summary.dump(2) + "\n";
        write_file(summary_path, summary_text);
        files.push_back({{"path", summary_path.filename().string()}, {"sha256", sha256_hex(summary_text)}});
        report.files.push_back(summary_path);

        nlohmann::json manifest = provenance;
        manifest["files"] = files;
        write_file(manifest_path, manifest.dump(2) + "\n");
        report.files.push_back(manifest_path);
        report.status = 0;
        report.message = "wrote " + std::to_string(report.files.size()) + " files to " + config.out_dir.string();
    } catch (const ConfigError& e) {
        report.status = 2;
        report.message = std::string("config error: ") + e.what();
    } catch (const InvalidParams& e) {
        report.status = 2;
        report.message = std::string("config error: ") + e.what();
    } catch (const std::invalid_argument& e) {
        report.status = 2;
        report.message = std::string("config error: ") + e.what();
    } catch (const std::exception& e) {
        report.status = 3;
        report.message = std::string("runtime error: ") + e.what();
    }
    return report;
}

} // namespace gdnm
