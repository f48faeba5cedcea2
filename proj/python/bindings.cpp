#include "gdnm/embedding.hpp"
#include "gdnm/ensemble.hpp"
#include "gdnm/experiment.hpp"
#include "gdnm/joint_step.hpp"
#include "gdnm/kernel.hpp"
#include "gdnm/series_io.hpp"
#include "gdnm/stats.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace gdnm;

namespace {

ModelParams make_params(double p, const std::map<int, double>& q, std::uint64_t seed) {
    ModelParams m;
    m.p = p;
    m.q.assign(q.begin(), q.end());
    m.seed = seed;
    m.validate();
    return m;
}

py::dict series_dict(const EstimateSeries& s) {
    py::list rows;
    for (const auto& r : s.rows) rows.append(py::make_tuple(r.grid, r.estimate, r.ci_low, r.ci_high, r.n));
    py::dict out;
    out["name"] = s.name;
    out["grid_label"] = s.grid_label;
    out["rows"] = rows;
    out["derived"] = s.derived;
    out["reference"] = s.reference;
    out["csv"] = series_csv(s);
    return out;
}

py::dict law_dict(const IncrementLaw& law) {
    std::map<std::int64_t, double> pmf;
    for (std::int64_t z = -law.radius; z <= law.radius; ++z) pmf[z] = law.at(z);
    py::dict out;
    out["pmf"] = pmf;
    out["truncation_bound"] = law.truncation_bound;
    out["sigma2"] = law.sigma2;
    out["abs_moments"] = law.abs_moments;
    return out;
}

py::object stopping(const StoppingTime& t) { return t ? py::object(py::int_(*t)) : py::object(py::none()); }

} // namespace

PYBIND11_MODULE(_gdnm, m) {
    m.doc() = "Generalized drainage network simulator";
    m.attr("__version__") = code_version();

    py::register_exception<InvalidParams>(m, "InvalidParams", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ScanLimitError>(m, "ScanLimitError", PyExc_RuntimeError);
    py::register_exception<ConditioningEmptyError>(m, "ConditioningEmptyError", PyExc_RuntimeError);
    py::register_exception<NonCenteredError>(m, "NonCenteredError", PyExc_ValueError);

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init(&make_params), py::arg("p"), py::arg("q"), py::arg("seed") = 0)
        .def_readonly("p", &ModelParams::p)
        .def_readonly("seed", &ModelParams::seed)
        .def_property_readonly("q", [](const ModelParams& self) {
            std::map<int, double> q;
            for (const auto& [r, w] : self.q) q[r] += w;
            return q;
        })
        .def("__repr__", [](const ModelParams& self) {
            return "ModelParams(p=" + format_number(self.p) + ", seed=" + std::to_string(self.seed) + ")";
        });

    py::class_<EnvOracle>(m, "EnvOracle")
        .def(py::init<ModelParams>(), py::arg("params"))
        .def("with_seed", &EnvOracle::with_seed)
        .def_property_readonly("seed", &EnvOracle::seed)
        .def_property_readonly("scan_radius", &EnvOracle::scan_radius)
        .def("omega", [](const EnvOracle& o, std::int64_t x, std::int64_t t) { return o.omega({x, t}); })
        .def("theta", [](const EnvOracle& o, std::int64_t x, std::int64_t t) { return o.theta({x, t}); })
        .def("zeta", [](const EnvOracle& o, std::int64_t x, std::int64_t t) { return o.zeta({x, t}); })
        .def("step",
             [](const EnvOracle& o, std::int64_t x, std::int64_t t) {
                 py::gil_scoped_release release;
                 return step(o, Site{x, t}).x;
             })
        .def("kth_open_above", [](const EnvOracle& o, std::int64_t x, std::int64_t t, int k, int side) {
            return kth_open_above(o, Site{x, t}, k, side ? Side::RightFirst : Side::LeftFirst).x;
        });

    m.def("increment_pmf_enumerated",
          [](const ModelParams& p, std::int64_t window) {
              return law_dict(window > 0 ? increment_pmf_enumerated(p, window) : increment_pmf_enumerated(p));
          },
          py::arg("params"), py::arg("window") = 0);
    m.def("increment_pmf_paper_form",
          [](const ModelParams& p, std::int64_t zmax) { return law_dict(increment_pmf_paper_form(p, zmax)); },
          py::arg("params"), py::arg("zmax"));

    m.def("evolve",
          [](const EnvOracle& o, const std::vector<std::int64_t>& xs, std::int64_t t, std::int64_t horizon) {
              std::vector<Site> starts;
              for (auto x : xs) starts.push_back({x, t});
              PathEnsemble e;
              {
                  py::gil_scoped_release release;
                  e = evolve(o, starts, horizon);
              }
              py::dict out;
              out["positions"] = e.positions;
              out["classes"] = e.classes;
              std::vector<std::tuple<std::size_t, std::size_t, std::int64_t>> crossings;
              for (const auto& c : e.crossings) crossings.emplace_back(c.a, c.b, c.n);
              out["crossings"] = crossings;
              return out;
          },
          py::arg("oracle"), py::arg("starts"), py::arg("t") = 0, py::arg("horizon"));
    m.def("coalescence_time",
          [](const EnvOracle& o, std::int64_t k, std::int64_t horizon) {
              return stopping(coalescence_time(o, k, horizon));
          },
          py::arg("oracle"), py::arg("k"), py::arg("horizon"));
    m.def("exit_time_nu",
          [](const EnvOracle& o, std::int64_t k, double u, std::int64_t horizon) {
              return stopping(exit_time_nu(o, k, u, horizon));
          },
          py::arg("oracle"), py::arg("k"), py::arg("u"), py::arg("horizon"));
    m.def("occupied_density", &occupied_density, py::arg("oracle"), py::arg("L"), py::arg("t"),
          py::call_guard<py::gil_scoped_release>());

    auto opts = [](unsigned workers) {
        RunOptions o;
        o.workers = workers;
        return o;
    };
    m.def("tail_curve",
          [opts](const ModelParams& p, std::int64_t k, const std::vector<std::int64_t>& t, std::uint64_t replicas,
                 unsigned workers) { return series_dict(tail_curve(p, k, t, replicas, opts(workers))); },
          py::arg("params"), py::arg("k"), py::arg("t_grid"), py::arg("replicas"), py::arg("workers") = 0);
    m.def("pair_meeting_cdf",
          [opts](const ModelParams& p, double d, const std::vector<double>& t, std::int64_t n, std::uint64_t replicas,
                 unsigned workers) { return series_dict(pair_meeting_cdf(p, d, t, n, replicas, opts(workers))); },
          py::arg("params"), py::arg("d"), py::arg("t_grid"), py::arg("n"), py::arg("replicas"),
          py::arg("workers") = 0);
    m.def("density_curve",
          [opts](const ModelParams& p, std::int64_t L, const std::vector<std::int64_t>& t, std::uint64_t replicas,
                 unsigned workers) { return series_dict(density_curve(p, L, t, replicas, opts(workers))); },
          py::arg("params"), py::arg("L"), py::arg("t_grid"), py::arg("replicas"), py::arg("workers") = 0);
    m.def("eta_counts",
          [opts](const ModelParams& p, double delta, double t0, double t, double a, double b, std::uint64_t replicas,
                 unsigned workers) {
              const EtaCount e = eta_counts(p, delta, t0, t, a, b, replicas, opts(workers));
              py::dict out;
              out["eta"] = e.eta;
              out["eta_hat"] = e.eta_hat;
              out["mean_eta"] = e.mean_eta();
              out["mean_eta_hat"] = e.mean_eta_hat();
              out["p_eta_ge_2"] = e.p_eta_at_least(2);
              out["bound"] = e.eta_hat_bound();
              out["segment_sites"] = e.segment_sites;
              return out;
          },
          py::arg("params"), py::arg("delta"), py::arg("t0"), py::arg("t"), py::arg("a"), py::arg("b"),
          py::arg("replicas"), py::arg("workers") = 0);
    m.def("crossing_coalesce_prob",
          [](const ModelParams& p, const std::vector<std::int64_t>& m_grid) {
              return series_dict(crossing_coalesce_prob(p, m_grid));
          },
          py::arg("params"), py::arg("m_grid"));
    m.def("p00_probe",
          [](const ModelParams& p, const std::vector<std::int64_t>& m_grid) {
              return series_dict(p00_probe(p, m_grid));
          },
          py::arg("params"), py::arg("m_grid"));
    m.def("p00_bounds",
          [](const ModelParams& p) {
              const Interval b = p00_bounds(p);
              return py::make_tuple(b.low, b.high);
          },
          py::arg("params"));

    m.def("skorohod_pair_law",
          [](const IntegerPmf& pmf) {
              const PairLaw law = skorohod_pair_law(pmf);
              std::vector<std::tuple<std::int64_t, std::int64_t, double>> atoms;
              for (const auto& a : law.atoms) atoms.emplace_back(a.u, a.v, a.weight);
              py::dict out;
              out["atoms"] = atoms;
              out["zero_atom"] = law.zero_atom;
              out["pushforward_error"] = law.pushforward_error(pmf);
              return out;
          },
          py::arg("pmf"));
    m.def("exit_survival", &exit_survival, py::arg("u"), py::arg("v"), py::arg("t"), py::arg("accuracy") = 1e-12);
    m.def("bm_level_hit_tail", &bm_level_hit_tail, py::arg("a"), py::arg("x"));
    m.def("bm_level_hit_tail_published", &bm_level_hit_tail_published, py::arg("a"), py::arg("x"));

    m.def("run_experiment",
          [](const std::string& experiment, const std::string& config_text, const std::string& out_dir,
             std::optional<std::uint64_t> seed, unsigned workers, bool plot) {
              ExperimentConfig c = parse_config(experiment, config_text);
              if (seed) c.model.seed = *seed;
              c.out_dir = out_dir;
              c.plot = c.plot || plot;
              RunReport r;
              {
                  py::gil_scoped_release release;
                  r = run_and_write(c, workers);
              }
              std::vector<std::string> files;
              for (const auto& f : r.files) files.push_back(f.string());
              py::dict out;
              out["status"] = r.status;
              out["message"] = r.message;
              out["files"] = files;
              return out;
          },
          py::arg("experiment"), py::arg("config"), py::arg("out_dir"), py::arg("seed") = py::none(),
          py::arg("workers") = 0, py::arg("plot") = false);
    m.def("experiment_names", &experiment_names);
}
