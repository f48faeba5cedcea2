#include "doctest.h"

#include "gdnm/experiment.hpp"
#include "gdnm/series_io.hpp"
#include "gdnm/svg_plot.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace gdnm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gdnm_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const char* kDrainage = R"(model:
  p: 0.5
  q: {1: 1.0}
  seed: 11
replicas: 300
)";

int count_of(const std::string& text, const std::string& needle) {
    int n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

} // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(0.5) == "0.5");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(-3.0) == "-3");
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("sha256") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing") {
    SUBCASE("model block and defaults") {
        const ExperimentConfig c = parse_config("tail", kDrainage);
        CHECK(c.model.p == 0.5);
        CHECK(c.model.seed == 11);
        CHECK(c.replicas == 300);
        CHECK(c.values("t") == experiment_defaults("tail").at("t"));
    }
    SUBCASE("experiment section and fractions") {
        const ExperimentConfig c = parse_config("boxexit", std::string(kDrainage) + "boxexit:\n  delta: 1/32\n  t: [0.1, 0.2]\n");
        CHECK(c.value("delta") == 1.0 / 32);
        CHECK(c.values("t") == std::vector<double>{0.1, 0.2});
    }
    SUBCASE("q as a list of pairs") {
        const ExperimentConfig c = parse_config("p00", "model:\n  p: 0.4\n  q: [[1, 0.5], [2, 0.5]]\n");
        CHECK(c.model.q.size() == 2);
    }
    auto field_of = [](const std::string& experiment, const std::string& text) -> std::string {
        try {
            parse_config(experiment, text);
        } catch (const ConfigError& e) {
            return e.field();
        } catch (const InvalidParams& e) {
            return e.field();
        }
        return "";
    };
    SUBCASE("errors name the field") {
        CHECK(field_of("tail", "model:\n  p: 0.5\n  q: {1: 0.5, 2: 0.4}\n") == "model.q");
        CHECK(field_of("tail", "model:\n  p: 1.5\n  q: {1: 1}\n") == "model.p");
        CHECK(field_of("tail", "model:\n  p: x\n  q: {1: 1}\n") == "model.p");
        CHECK(field_of("tail", "replicas: 5\n") == "model");
        CHECK(field_of("tail", std::string(kDrainage) + "tail:\n  bogus: 1\n") == "tail.bogus");
        CHECK(field_of("tail", std::string(kDrainage) + "tail:\n  t: []\n") == "tail.t");
        CHECK(field_of("tail", "model:\n  p: 0.5\n  q: {1: 1}\nreplicas: 0\n") == "replicas");
        CHECK(field_of("nonsense", kDrainage) == "experiment");
        CHECK(field_of("tail", "model: [unclosed\n") == "config");
    }
}

TEST_CASE("increment experiment writes the exact law") {
    const fs::path dir = scratch_dir("increment");
    ExperimentConfig c = parse_config("increment", kDrainage);
    c.out_dir = dir;
    c.plot = true;
    const RunReport report = run_and_write(c, 1);
    REQUIRE(report.status == 0);
    const std::string csv = slurp(dir / "increment_seed11.csv");
    CHECK(csv.rfind("grid,estimate,ci_low,ci_high,n\n", 0) == 0);
    CHECK(csv.find("\n0,0.5,0.5,") != std::string::npos);
    CHECK(fs::exists(dir / "increment_seed11.svg"));
    CHECK(fs::exists(dir / "increment_seed11.summary.json"));

    // Every output file is listed with its content hash.
    const auto manifest = nlohmann::json::parse(slurp(dir / "increment_seed11.manifest.json"));
    CHECK(manifest.at("seed") == 11);
    CHECK(manifest.at("config_sha256") == sha256_hex(kDrainage));
    CHECK(manifest.at("code_version") == code_version());
    CHECK(manifest.at("files").size() == 3);
    for (const auto& f : manifest.at("files"))
        CHECK(f.at("sha256") == sha256_hex(slurp(dir / f.at("path").get<std::string>())));
    const auto summary = nlohmann::json::parse(slurp(dir / "increment_seed11.summary.json"));
    CHECK(summary.at("derived").at("sigma2").get<double>() == doctest::Approx(10.0 / 9.0));
    CHECK(summary.contains("runtime_seconds"));
}

TEST_CASE("reruns are byte-identical across worker counts") {
    const fs::path dir = scratch_dir("determinism");
    for (const std::string experiment : {"tail", "eta", "embed"}) {
        ExperimentConfig c = parse_config(experiment, std::string(kDrainage) +
                                                          "tail:\n  t: [0, 16, 64]\neta:\n  delta: [1/8]\n"
                                                          "embed:\n  exit_samples: 200\n");
        c.replicas = experiment == "embed" ? 30'000 : 300;
        c.out_dir = dir / "a";
        REQUIRE(run_and_write(c, 1).status == 0);
        c.out_dir = dir / "b";
        REQUIRE(run_and_write(c, 1).status == 0);
        c.out_dir = dir / "c";
        REQUIRE(run_and_write(c, 8).status == 0);
        const std::string name = experiment + "_seed11.csv";
        const std::string a = slurp(dir / "a" / name);
        CHECK(!a.empty());
        CHECK(a == slurp(dir / "b" / name));
        CHECK(a == slurp(dir / "c" / name));
    }
}

TEST_CASE("run status codes") {
    const fs::path dir = scratch_dir("status");
    ExperimentConfig c = parse_config("eta", std::string(kDrainage) + "eta:\n  a: 1\n  b: 0\n");
    c.out_dir = dir;
    CHECK(run_and_write(c, 1).status == 2);
    ExperimentConfig d = parse_config("tail", std::string(kDrainage) + "tail:\n  k: 0\n");
    d.out_dir = dir;
    const RunReport r = run_and_write(d, 1);
    CHECK(r.status == 2);
    CHECK(r.message.find("tail.k") != std::string::npos);
}

#ifdef GDNM_CLI_PATH
TEST_CASE("command line binary") {
    const fs::path dir = scratch_dir("binary");
    {
        std::ofstream(dir / "good.yaml") << kDrainage;
        std::ofstream(dir / "bad.yaml") << "model:\n  p: 0.5\n  q: {1: 0.5, 2: 0.4}\n";
    }
    auto run = [&](const std::string& args) {
        const std::string cmd = std::string(GDNM_CLI_PATH) + " " + args + " > " + (dir / "log.txt").string() + " 2>&1";
        const int raw = std::system(cmd.c_str());
        return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    };
    CHECK(run("increment --config " + (dir / "good.yaml").string() + " --out " + (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "increment_seed11.csv"));
    CHECK(run("increment --config " + (dir / "good.yaml").string() + " --seed 5 --plot --out " +
              (dir / "out").string()) == 0);
    CHECK(fs::exists(dir / "out" / "increment_seed5.svg"));
    CHECK(run("increment --config " + (dir / "bad.yaml").string() + " --out " + (dir / "out").string()) == 2);
    CHECK(slurp(dir / "log.txt").find("model.q") != std::string::npos);
    CHECK(run("nonsense --config " + (dir / "good.yaml").string()) == 2);
    CHECK(run("increment --config " + (dir / "missing.yaml").string()) == 2);
}
#endif

TEST_CASE("plots") {
    SUBCASE("single row") {
        EstimateSeries s;
        s.name = "one";
        s.rows.push_back({1.0, 0.4, 0.3, 0.5, 100});
        const std::string svg = plot(s);
        CHECK(svg.rfind("<svg", 0) == 0);
        CHECK(count_of(svg, "class=\"marker\"") == 1);
        CHECK(count_of(svg, "class=\"whisker\"") == 1);
    }
    SUBCASE("tail style draws the anchored reference") {
        EstimateSeries s;
        s.name = "tail";
        for (double t : {0.0, 64.0, 256.0, 1024.0}) s.rows.push_back({t, t == 0 ? 1.0 : 1.0 / std::sqrt(t), 0, 1, 10});
        CHECK(plot(s, PlotStyle::Tail).find("tail-reference") != std::string::npos);
        CHECK(plot(s).find("tail-reference") == std::string::npos);
    }
    SUBCASE("eta style draws the bound") {
        EstimateSeries s;
        s.name = "eta";
        s.rows.push_back({0.25, 0.5, 0.45, 0.55, 10});
        s.rows.push_back({0.125, 0.55, 0.5, 0.6, 10});
        s.derived["bound"] = 0.5641895835;
        CHECK(plot(s, PlotStyle::Eta).find("eta-bound") != std::string::npos);
    }
    SUBCASE("dyadic grid detection") {
        EstimateSeries s;
        for (double t : {16.0, 32.0, 64.0}) s.rows.push_back({t, 0.1, 0.1, 0.1, 1});
        CHECK(is_dyadic_grid(s));
        s.rows.push_back({100.0, 0.1, 0.1, 0.1, 1});
        CHECK_FALSE(is_dyadic_grid(s));
        EstimateSeries halving;
        for (double d : {0.25, 0.125, 0.0625}) halving.rows.push_back({d, 0.1, 0.1, 0.1, 1});
        CHECK_FALSE(is_dyadic_grid(halving));
    }
}
