#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agewire/activity.hpp"
#include "agewire/aging.hpp"
#include "agewire/circuit.hpp"

namespace agewire {

enum class AlphaMode : std::uint8_t { Fixed, Uniform0p1To0p9 };

std::string_view to_string(AlphaMode mode);
AlphaMode parse_alpha_mode(std::string_view text);

struct MonteCarloConfig {
    std::size_t iterations = 5000;
    std::uint64_t seed = 1;
    AlphaMode alpha_mode = AlphaMode::Fixed;
    std::vector<double> time_points = {0.0, 1.0, 2.0, 3.0, 4.0};
    /// Stimuli (all-zeros -> random vector) behind each average-delay estimate.
    std::size_t avg_samples = 64;
    std::size_t threads = 0;

    void validate() const;
};

struct Percentiles {
    double p5 = 0, p25 = 0, median = 0, p75 = 0, p95 = 0, mean = 0, min = 0, max = 0;
};

Percentiles summarize(std::vector<double> values);

struct MonteCarloPoint {
    double t_years = 0.0;
    std::vector<double> max_delay;  // per iteration: static longest path
    std::vector<double> avg_delay;  // per iteration: mean settle time over sampled stimuli
    Percentiles max_summary;
    Percentiles avg_summary;
};

struct MonteCarloResult {
    std::vector<MonteCarloPoint> points;
    std::size_t saturated_iterations = 0;
};

/// Iteration i draws process variation and (optionally) input probabilities
/// from streams keyed by (seed, i) only, so every configuration sees the same
/// draws and results do not depend on the worker count.
MonteCarloResult run_monte_carlo(const Netlist& netlist, const InputProfile& profile, const MonteCarloConfig& config,
                                 const AgingParams& params = {});

}  // namespace agewire
