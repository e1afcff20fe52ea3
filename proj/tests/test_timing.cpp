#include <doctest.h>

#include <algorithm>
#include <functional>

#include "agewire/activity.hpp"
#include "agewire/rng.hpp"
#include "agewire/timing.hpp"

using namespace agewire;

namespace {

std::vector<double> random_delays(const Netlist& n, std::uint64_t seed) {
    auto rng = stream(seed, 0);
    std::uniform_real_distribution<double> u(0.5, 3.0);
    std::vector<double> d(n.gate_count());
    for (auto& x : d) x = u(rng);
    return d;
}

// Every input-to-output path delay, by depth-first enumeration.
std::vector<double> all_path_delays(const Netlist& n, const std::vector<double>& d) {
    auto is_out = n.output_mask();
    std::vector<double> out;
    std::function<void(SignalId, double)> walk = [&](SignalId s, double acc) {
        if (is_out[s.index]) out.push_back(acc);
        for (GateId g : n.fanout()[s.index]) walk(n.gate(g).output, acc + d[g.index]);
    };
    for (std::uint32_t i = 0; i < n.input_count(); ++i) walk(SignalId{i}, 0.0);
    std::sort(out.rbegin(), out.rend());
    return out;
}

}  // namespace

TEST_CASE("static timing equals brute-force longest path") {
    for (int w : {2, 3}) {
        Netlist n = build_array_multiplier(w);
        auto d = random_delays(n, static_cast<std::uint64_t>(w));
        auto oracle = all_path_delays(n, d);
        CHECK(static_max_delay(n, d) == doctest::Approx(oracle.front()).epsilon(1e-12));
        auto top = static_critical_paths(n, d, 6);
        REQUIRE(top.paths.size() == 6);
        for (std::size_t k = 0; k < 6; ++k) {
            CHECK(top.paths[k].static_delay == doctest::Approx(oracle[k]).epsilon(1e-12));
            double sum = 0;
            for (GateId g : top.paths[k].gates) sum += d[g.index];
            CHECK(sum == doctest::Approx(top.paths[k].static_delay).epsilon(1e-12));
        }
    }
    Netlist n = build_array_multiplier(2);
    auto d = random_delays(n, 1);
    CHECK(static_critical_paths(n, d, 100000).fewer_than_requested);
}

TEST_CASE("an inverter chain settles after the sum of its delays") {
    NetlistBuilder b(1);
    SignalId s = b.input(0);
    for (int i = 0; i < 5; ++i) s = b.add_gate(GateKind::Inv, {s});
    b.add_output(s);
    Netlist n = std::move(b).finish();
    std::vector<double> d = {1.0, 2.0, 0.5, 1.5, 1.0};
    CHECK(settle_time(n, 0, 1, d) == doctest::Approx(6.0));
    CHECK(settle_time(n, 1, 0, d) == doctest::Approx(6.0));
    CHECK(settle_time(n, 1, 1, d) == 0.0);
}

TEST_CASE("settle time never exceeds static timing and latching is consistent") {
    Netlist n = build_wallace_multiplier(3);
    auto d = random_delays(n, 9);
    const double sta = static_max_delay(n, d);
    TransitionSimulator sim(n, d);
    for (std::uint64_t v = 0; v < 64; ++v) {
        std::uint64_t latched = 0;
        const double t = sim.settle_time(0, v, sta, latched);
        CHECK(t <= sta + 1e-12);
        const std::uint64_t a = v & 7, bb = v >> 3;
        CHECK(latched == a * bb);
    }
}

TEST_CASE("sweeps are thread-count independent") {
    Netlist n = build_array_multiplier(4);
    auto stress = compute_stress(n, InputProfile::uniform(n.input_count()));
    AgingParams p;
    auto one = delay_sweep(n, stress, 4.0, p, StimulusMode::exhaustive(), true, 1);
    auto many = delay_sweep(n, stress, 4.0, p, StimulusMode::exhaustive(), true, 3);
    CHECK(one.max_delay == many.max_delay);
    CHECK(one.avg_delay == many.avg_delay);
    CHECK(one.per_input == many.per_input);
    auto pairs = delay_sweep(n, stress, 4.0, p, StimulusMode::random_pairs(500, 3), false, 2);
    CHECK(pairs.count == 500);
}

TEST_CASE("guard band catches no violation on the untampered design") {
    Netlist n = build_array_multiplier(4);
    auto stress = compute_stress(n, InputProfile::uniform(n.input_count()));
    AgingParams p;
    auto guard = compute_guard_band(n, stress, p, 4.0);
    auto states = make_states(stress, p);
    for (double t : {0.0, 1.0, 4.0}) {
        auto e = error_likelihood(n, gate_delays(n, states, t, p).delay, t, guard);
        CHECK(e.violations == 0);
        CHECK(e.evaluated == 256);
    }
    std::vector<double> slow = gate_delays(n, states, 4.0, p).delay;
    for (auto& x : slow) x *= 1.2;
    CHECK(error_likelihood(n, slow, 4.0, guard).violation_fraction > 0);
}
