#include "agewire/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <optional>
#include <random>

#include "agewire/parallel.hpp"
#include "agewire/rng.hpp"
#include "agewire/timing.hpp"

namespace agewire {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error("montecarlo", what); }

double quantile(const std::vector<double>& sorted, double q) {
    if (sorted.size() == 1) return sorted.front();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

std::string_view to_string(AlphaMode mode) { return mode == AlphaMode::Fixed ? "FIXED" : "UNIFORM_0P1_0P9"; }

AlphaMode parse_alpha_mode(std::string_view text) {
    if (text == "FIXED") return AlphaMode::Fixed;
    if (text == "UNIFORM_0P1_0P9") return AlphaMode::Uniform0p1To0p9;
    fail("unknown alpha mode '" + std::string(text) + "'");
}

void MonteCarloConfig::validate() const {
    if (iterations < 1) fail("iterations must be >= 1");
    if (avg_samples < 1) fail("avg_samples must be >= 1");
    if (!std::is_sorted(time_points.begin(), time_points.end())) fail("time points must be sorted");
    for (double t : time_points)
        if (!(t >= 0)) fail("time points must be non-negative");
}

Percentiles summarize(std::vector<double> values) {
    Percentiles p;
    if (values.empty()) return p;
    std::sort(values.begin(), values.end());
    p.p5 = quantile(values, 0.05);
    p.p25 = quantile(values, 0.25);
    p.median = quantile(values, 0.5);
    p.p75 = quantile(values, 0.75);
    p.p95 = quantile(values, 0.95);
    p.min = values.front();
    p.max = values.back();
    double sum = 0.0;
    for (double v : values) sum += v;
    p.mean = sum / static_cast<double>(values.size());
    return p;
}

MonteCarloResult run_monte_carlo(const Netlist& netlist, const InputProfile& profile, const MonteCarloConfig& config,
                                 const AgingParams& params) {
    config.validate();
    params.validate();
    if (config.alpha_mode == AlphaMode::Uniform0p1To0p9 && profile.mode != ProfileMode::Exhaustive)
        fail("UNIFORM_0P1_0P9 re-weights an EXHAUSTIVE population; use an EXHAUSTIVE profile");
    const std::size_t n_iter = config.iterations;
    const std::size_t n_t = config.time_points.size();
    const StimulusMode stimuli = StimulusMode::random_vectors(config.avg_samples, 0);

    MonteCarloResult result;
    result.points.resize(n_t);
    for (std::size_t k = 0; k < n_t; ++k) {
        result.points[k].t_years = config.time_points[k];
        result.points[k].max_delay.assign(n_iter, 0.0);
        result.points[k].avg_delay.assign(n_iter, 0.0);
    }
    std::vector<std::uint8_t> saturated(n_iter, 0);

    const SignalActivity base_activity(netlist, profile);
    const StressMap fixed_stress = base_activity.stress(netlist);

    parallel_blocks(
        n_iter,
        [&](std::size_t begin, std::size_t end) {
            std::optional<SignalActivity> activity;
            if (config.alpha_mode == AlphaMode::Uniform0p1To0p9) activity.emplace(base_activity);
            std::vector<double> alpha_in(netlist.input_count());
            for (std::size_t i = begin; i < end; ++i) {
                StressMap drawn;
                if (activity) {
                    auto rng = stream(config.seed, 2 * i + 1);
                    std::uniform_real_distribution<double> uni(0.1, 0.9);
                    for (auto& a : alpha_in) a = uni(rng);
                    activity->reweight(alpha_in);
                    drawn = activity->stress(netlist);
                }
                const StressMap& stress = activity ? drawn : fixed_stress;
                auto pv = sample_pv(netlist.site_count(), params.sigma_vth, key(config.seed, 2 * i));
                auto states = make_states(stress, params, pv);
                StimulusMode mine = stimuli;
                mine.seed = key(config.seed, i, 0xa5);
                for (std::size_t k = 0; k < n_t; ++k) {
                    auto delays = gate_delays(netlist, states, config.time_points[k], params);
                    if (delays.saturated) saturated[i] = 1;
                    result.points[k].max_delay[i] = static_max_delay(netlist, delays.delay);
                    TransitionSimulator sim(netlist, delays.delay);
                    double sum = 0.0;
                    for (std::size_t s = 0; s < mine.count; ++s) {
                        auto [prev, next] = mine.at(netlist, s);
                        sum += sim.settle_time(prev, next);
                    }
                    result.points[k].avg_delay[i] = sum / static_cast<double>(mine.count);
                }
            }
        },
        config.threads);

    for (auto& p : result.points) {
        p.max_summary = summarize(p.max_delay);
        p.avg_summary = summarize(p.avg_delay);
    }
    result.saturated_iterations = static_cast<std::size_t>(std::count(saturated.begin(), saturated.end(), 1));
    return result;
}

}  // namespace agewire
