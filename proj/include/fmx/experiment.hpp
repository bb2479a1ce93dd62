#pragma once

// Experiment configuration and runners behind the `fmx` command line.
//
// Configs are INI files (sections [experiment], [geometry], [plan],
// [sweep], [signal]); see configs/ for one file per experiment. Every field
// has a default, so an empty file is a valid config.

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fmx::experiment {

inline constexpr const char* kConfigFormat = "fmx-ini/1";

enum class ExperimentId { fig2, fig3, fig4a, fig4b, validate };

std::string to_string(ExperimentId id);
ExperimentId experiment_from_string(const std::string& name);

using Triple = std::array<double, 3>;

struct GeometryBlock {
    Triple bs_first{30.0, 30.0, 10.0};
    Triple frm_first{0.0, 0.0, 4.0};
    Triple user{-50.0, 30.0, 1.0};
    double bs_spacing = 0.1;
    double frm_spacing = 0.1;
    double reference_distance = 50.0;
    double pathloss_exponent = 2.0;
    std::string pathloss_interpretation = "amplitude";
    double light_speed = 3.0e8;

    bool operator==(const GeometryBlock&) const = default;
};

struct PlanBlock {
    double carrier = 3.0e9;
    int M = 8;
    int V = 2;
    int S = 2;
    double normalized_spacing = 1.0;  // i = f_n / delta_f
    double max_delay = 1e-6;
    double bandwidth = 0.0;
    int L = 256;
    std::string amplitude_law = "rayleigh";

    bool operator==(const PlanBlock&) const = default;
};

struct SweepBlock {
    double power_db_start = -10.0;
    double power_db_stop = 30.0;
    double power_db_step = 2.0;
    double distance_start = 5.0;  // horizontal user offset from the BS, m
    double distance_stop = 200.0;
    double distance_step = 0.5;
    double user_height = 1.0;
    double i_start = 0.05;
    double i_stop = 3.0;
    double i_step = 0.05;
    std::vector<int> grid_sizes{1, 2};  // V = S values for fig4a
    std::vector<std::string> models{"pair_only", "shared_scatterers"};

    bool operator==(const SweepBlock&) const = default;
};

struct SignalBlock {
    int carrier = 1024;
    int sample_rate = 8192;
    int filter_taps = 1025;
    int scenes = 100;

    bool operator==(const SignalBlock&) const = default;
};

struct ExperimentConfig {
    ExperimentId id = ExperimentId::fig4b;
    std::size_t trials = 10000;
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    unsigned threads = 0;
    GeometryBlock geometry;
    PlanBlock plan;
    SweepBlock sweep;
    SignalBlock signal;

    bool operator==(const ExperimentConfig&) const = default;

    // Defaults for one experiment (fig2 uses M = V = S = 1 and i = 0.1).
    static ExperimentConfig defaults(ExperimentId id);

    void validate() const;
};

// Parses INI text; keys absent from the text keep defaults(id), where id is
// taken from [experiment] id or `fallback`. Throws ConfigError naming the key.
ExperimentConfig parse_config(const std::string& ini_text, ExperimentId fallback);
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentId fallback);
std::string to_ini(const ExperimentConfig& config);

std::vector<double> linear_grid(double start, double stop, double step);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const;
};

struct ExperimentOutput {
    Table table;
    nlohmann::json summary;
};

ExperimentOutput run_fig2(const ExperimentConfig& config);
ExperimentOutput run_fig3(const ExperimentConfig& config);
ExperimentOutput run_fig4a(const ExperimentConfig& config);
ExperimentOutput run_fig4b(const ExperimentConfig& config);
ExperimentOutput run_validate(const ExperimentConfig& config);
ExperimentOutput run_experiment(const ExperimentConfig& config);

struct RunResult {
    std::filesystem::path csv;
    std::filesystem::path manifest;
    nlohmann::json summary;
};

// Runs the experiment and writes <out>/<id>.csv and <out>/<id>.manifest.json.
RunResult run(const ExperimentConfig& config);

std::string sha256_hex(const std::string& data);

// Strict local minima whose depth against the surrounding maxima exceeds
// `min_depth` (same units as the series).
std::size_t count_fades(const std::vector<double>& series, double min_depth);

double standard_deviation(const std::vector<double>& series);

}  // namespace fmx::experiment
