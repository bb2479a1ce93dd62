// fmx <experiment> --config <path> [--seed N] [--trials N] [--out DIR]

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fmx/errors.hpp"
#include "fmx/experiment.hpp"
#include "fmx/version.hpp"

int main(int argc, char** argv) {
    namespace ex = fmx::experiment;

    CLI::App app{"Link-level simulator for frequency-mixing reflective surfaces", "fmx"};
    app.set_version_flag("--version", std::string(fmx::kVersion));

    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<unsigned> threads;
    std::optional<std::string> out;
    bool print_config = false;

    app.add_option("experiment", experiment, "fig2 | fig3 | fig4a | fig4b | validate")
        ->required()
        ->check(CLI::IsMember({"fig2", "fig3", "fig4a", "fig4b", "validate"}));
    app.add_option("--config", config_path, "INI config file")->required()->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "master seed (overrides the config)");
    app.add_option("--trials", trials, "Monte-Carlo trials (overrides the config)")->check(CLI::PositiveNumber);
    app.add_option("--threads", threads, "worker threads, 0 = all cores");
    app.add_option("--out", out, "output directory (overrides the config)");
    app.add_flag("--print-config", print_config, "print the resolved config and exit");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto id = ex::experiment_from_string(experiment);
        auto config = ex::load_config(config_path, id);
        if (config.id != id)
            throw fmx::ConfigError("experiment.id", "config is for '" + ex::to_string(config.id) + "', not '" +
                                                        experiment + "'");
        if (seed) config.seed = *seed;
        if (trials) config.trials = *trials;
        if (threads) config.threads = *threads;
        if (out) config.output_dir = *out;
        config.validate();

        if (print_config) {
            std::cout << ex::to_ini(config);
            return EXIT_SUCCESS;
        }
        const auto result = ex::run(config);
        std::cout << "wrote " << result.csv.string() << "\n"
                  << "wrote " << result.manifest.string() << "\n"
                  << result.summary.dump(2) << "\n";
        if (config.id == ex::ExperimentId::validate && !result.summary.value("all_pass", false)) return 3;
        return EXIT_SUCCESS;
    } catch (const fmx::ConfigError& e) {
        std::cerr << "fmx: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fmx: " << e.what() << "\n";
        return 1;
    }
}
