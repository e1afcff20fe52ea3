// agewire command-line runner.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "agewire/experiment.hpp"

namespace {

int report_error(const std::string& module, const std::string& message, int code = 1) {
    nlohmann::json err = {{"error", {{"module", module}, {"message", message}}}};
    std::cerr << err.dump() << '\n';
    return code;
}

int run_verify(int argc, char** argv) {
    CLI::App app{"Recompute output checksums against a run manifest"};
    std::string manifest, dir;
    app.add_option("manifest", manifest, "manifest.json of a previous run")->required();
    app.add_option("--dir", dir, "output directory (default: the manifest's directory)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    if (dir.empty()) dir = std::filesystem::path(manifest).parent_path().string();
    if (dir.empty()) dir = ".";
    auto r = agewire::verify_manifest(manifest, dir);
    nlohmann::json out = {{"ok", r.ok}, {"checked", r.checked}, {"missing", r.missing}, {"mismatched", r.mismatched}};
    std::cout << out.dump(2) << '\n';
    return r.ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        if (argc >= 2 && std::string(argv[1]) == "verify") return run_verify(argc - 1, argv + 1);

        CLI::App app{"Gate-level NBTI aging-attack lab for rewired multipliers.\n"
                     "Experiments: STRESS_HIST DELAY_VS_TIME BITWIDTH_SCALING MONTE_CARLO\n"
                     "             ERROR_LIKELIHOOD BASELINE_COMPARE INFERENCE_CURVE\n"
                     "Also: agewire verify <manifest.json> [--dir DIR]\n"
                     "AGEWIRE_THREADS caps the worker count."};
        std::string experiment, config_path, out_dir;
        std::optional<std::uint64_t> seed;
        std::optional<std::size_t> iterations;
        bool dump = false;
        app.add_option("experiment", experiment, "experiment to run")->required();
        app.add_option("--config", config_path, "JSON configuration (defaults apply to missing keys)");
        app.add_option("--seed", seed, "master seed");
        app.add_option("--out", out_dir, "output directory");
        app.add_option("--iterations", iterations, "Monte Carlo iterations");
        app.add_flag("--dump-config", dump, "print the effective configuration and exit");
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            if (e.get_exit_code() == 0) return app.exit(e);
            return report_error("cli", e.what(), 2);
        }

        agewire::ExperimentConfig config;
        std::optional<agewire::ExperimentKind> pinned;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) return report_error("cli", "cannot open config " + config_path);
            nlohmann::json j;
            try {
                in >> j;
            } catch (const nlohmann::json::exception& e) {
                return report_error("cli", "config " + config_path + " is not valid JSON: " + e.what());
            }
            config = j.get<agewire::ExperimentConfig>();
            if (j.contains("experiment")) pinned = config.experiment;
        }
        const auto kind = agewire::parse_experiment(experiment);
        if (pinned && *pinned != kind)
            return report_error("cli", "config is for " + std::string(agewire::to_string(config.experiment)) +
                                           " but " + experiment + " was requested");
        config.experiment = kind;
        if (seed) config.seed = *seed;
        if (iterations) config.mc_iterations = *iterations;
        if (!out_dir.empty()) config.output_dir = out_dir;
        config.validate();

        if (dump) {
            std::cout << nlohmann::json(config).dump(2) << '\n';
            return 0;
        }
        auto result = agewire::run_experiment(config);
        agewire::write_outputs(result, config.output_dir);
        std::cout << result.manifest.at("outputs").size() << " files written to " << config.output_dir << '\n';
        return 0;
    } catch (const agewire::Error& e) {
        return report_error(e.module(), e.what());
    } catch (const nlohmann::json::exception& e) {
        return report_error("cli", std::string("config: ") + e.what());
    } catch (const std::exception& e) {
        return report_error("cli", e.what());
    }
}
