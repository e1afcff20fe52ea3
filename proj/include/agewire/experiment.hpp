#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "agewire/aging.hpp"
#include "agewire/attack.hpp"
#include "agewire/circuit.hpp"
#include "agewire/montecarlo.hpp"

namespace agewire {

inline constexpr const char* kToolVersion = "0.1.0";

enum class ExperimentKind : std::uint8_t {
    StressHist,
    DelayVsTime,
    BitwidthScaling,
    MonteCarlo,
    ErrorLikelihood,
    BaselineCompare,
    InferenceCurve,
};

std::string_view to_string(ExperimentKind kind);
ExperimentKind parse_experiment(std::string_view text);

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::DelayVsTime;
    Architecture architecture = Architecture::Array;
    int width = 8;
    std::vector<Architecture> architectures = {Architecture::Array, Architecture::Wallace};  // BITWIDTH_SCALING
    std::vector<int> widths = {6, 16};                                                      // BITWIDTH_SCALING
    std::vector<std::string> attacks;  // empty: the experiment's default set
    std::vector<double> time_grid = {0, 0.5, 1, 1.5, 2, 2.5, 3, 3.5, 4};
    std::uint64_t seed = 1;
    double horizon_years = 4.0;
    double input_alpha = 0.5;
    std::size_t profile_samples = 16384;  // SAMPLED stress above 20 primary inputs
    std::string stimulus = "AUTO";        // AUTO | EXHAUSTIVE | RANDOM_VECTORS | RANDOM_PAIRS
    std::size_t stimulus_count = 20000;
    std::size_t histogram_bins = 10;
    std::size_t mc_iterations = 5000;
    AlphaMode mc_alpha_mode = AlphaMode::Uniform0p1To0p9;
    std::size_t mc_avg_samples = 64;
    std::vector<double> mc_time_points = {0, 1, 2, 3, 4};
    BaselineParams baseline;
    std::string model_path = "data/digits_mlp.json";
    bool write_fault_tables = false;
    AgingParams aging;
    std::string output_dir = "out";

    void validate() const;
    /// Attack list with the experiment's default filled in.
    std::vector<std::string> resolved_attacks() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
/// Unknown keys are rejected so typos fail loudly.
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct ExperimentResult {
    std::map<std::string, std::string> files;  // relative path -> contents
    nlohmann::json manifest;
};

/// Runs everything in memory; nothing touches disk until write_outputs.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes the files and manifest.json under `dir`.
void write_outputs(const ExperimentResult& result, const std::string& dir);

struct VerifyReport {
    bool ok = false;
    std::vector<std::string> missing;
    std::vector<std::string> mismatched;
    std::size_t checked = 0;
};

VerifyReport verify_manifest(const std::string& manifest_path, const std::string& output_dir);

}  // namespace agewire
