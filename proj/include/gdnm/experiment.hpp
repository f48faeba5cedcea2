#pragma once

#include "gdnm/env.hpp"
#include "gdnm/stats.hpp"
#include "gdnm/svg_plot.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace gdnm {

/// Configuration problem; `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

struct ExperimentConfig {
    std::string experiment;
    ModelParams model;
    std::uint64_t replicas = 1000;
    std::filesystem::path out_dir = ".";
    bool plot = false;
    /// Output stem prefix; defaults to the experiment name.
    std::string name;
    double confidence = 0.99;
    /// Experiment-specific section, scalars stored as one-element lists.
    std::map<std::string, std::vector<double>> grid;
    /// Raw config text, hashed into the manifest.
    std::string source;

    /// Grid entry or its default.
    const std::vector<double>& values(const std::string& key) const;
    double value(const std::string& key) const;
};

const std::vector<std::string>& experiment_names();

/// Default experiment-specific section.
const std::map<std::string, std::vector<double>>& experiment_defaults(const std::string& experiment);

/// Parses YAML text. The experiment section is the top-level key named after
/// the experiment. Throws ConfigError or InvalidParams.
ExperimentConfig parse_config(const std::string& experiment, const std::string& yaml_text);
ExperimentConfig load_config(const std::string& experiment, const std::filesystem::path& path);

struct ExperimentResult {
    EstimateSeries series;
    PlotStyle style = PlotStyle::Plain;
    /// Extra summary fields beyond the series.
    nlohmann::json extra = nlohmann::json::object();
};

ExperimentResult run_experiment(const ExperimentConfig& config, unsigned workers = 0);

/// `<name>_seed<seed>`.
std::string output_stem(const ExperimentConfig& config);

struct RunReport {
    int status = 0;
    std::vector<std::filesystem::path> files;
    std::string message;
};

/// Runs and writes <stem>.csv, <stem>.summary.json, <stem>.manifest.json and
/// <stem>.svg when plotting. Status: 0 ok, 2 config error, 3 runtime error.
RunReport run_and_write(const ExperimentConfig& config, unsigned workers = 0);

std::string code_version();

} // namespace gdnm
