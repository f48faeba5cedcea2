#include "gdnm/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

int main(int argc, char** argv) {
    CLI::App app{"Drainage network simulator: runs one experiment and writes CSV, JSON and SVG results."};
    app.set_version_flag("--version", gdnm::code_version());

    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
    std::optional<std::string> out_dir;
    bool plot = false;

    app.add_option("experiment", experiment, "Experiment to run")
        ->required()
        ->check(CLI::IsMember(gdnm::experiment_names()));
    app.add_option("--config", config_path, "YAML config file")->required();
    app.add_option("--seed", seed, "Override model.seed");
    app.add_option("--workers", workers, "Worker threads (0: one per core); never affects results");
    app.add_option("--out", out_dir, "Output directory (overrides 'out' in the config)");
    app.add_flag("--plot", plot, "Also write an SVG plot");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    gdnm::ExperimentConfig config;
    try {
        config = gdnm::load_config(experiment, config_path);
    } catch (const gdnm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const gdnm::InvalidParams& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    if (seed) config.model.seed = *seed;
    if (out_dir) config.out_dir = *out_dir;
    if (plot) config.plot = true;

    const gdnm::RunReport report = gdnm::run_and_write(config, workers);
    (report.status == 0 ? std::cout : std::cerr) << report.message << '\n';
    return report.status;
}
