#include <doctest.h>

#include <algorithm>
#include <functional>

#include "agewire/attack.hpp"
#include "agewire/rng.hpp"

using namespace agewire;

namespace {

InputProfile skewed(std::size_t n) {
    auto p = InputProfile::uniform(n);
    for (std::size_t i = 0; i < n; ++i) p.alpha_in[i] = 0.15 + 0.7 * static_cast<double>(i) / static_cast<double>(n);
    return p;
}

// Best route delay over every absolute wiring of the given adders.
double exhaustive_best(const Netlist& n, const InputProfile& profile, const PathRoute& route,
                       const std::vector<std::uint32_t>& adders) {
    StressEvaluator ev(n, profile, AgingParams{}, 4.0);
    double best = route_delay(ev.netlist(), route, ev.delays());
    std::function<void(std::size_t)> go = [&](std::size_t k) {
        if (k == adders.size()) {
            best = std::max(best, route_delay(ev.netlist(), route, ev.delays()));
            return;
        }
        for (const auto& p : Permutation::all(n.adder(adders[k]).inputs.size())) {
            ev.set(adders[k], p);
            go(k + 1);
        }
        ev.set(adders[k], Permutation::identity(n.adder(adders[k]).inputs.size()));
    };
    go(0);
    return best;
}

}  // namespace

TEST_CASE("config tags parse and print") {
    CHECK(ConfigTag::parse("M-0-0").kind == ConfigTag::Kind::None);
    auto t = ConfigTag::parse("M-2-75%");
    CHECK(t.kind == ConfigTag::Kind::Paths);
    CHECK(t.paths == 2);
    CHECK(t.percent == 75);
    CHECK(ConfigTag::parse("M-ALL-100%").str() == "M-All-100%");
    CHECK(ConfigTag::parse("F-10%").kind == ConfigTag::Kind::AdderFraction);
    for (const char* bad : {"M-1-0%", "M-1-101%", "X-1-50%", "M-0-50%", "M--50%", "PV_TROJAN"})
        CHECK_THROWS_AS(ConfigTag::parse(bad), Error);
}

TEST_CASE("single full adder: greedy equals exhaustive over the six wirings") {
    Netlist fa = build_full_adder_netlist();
    auto profile = skewed(3);
    AgingParams params;
    AttackOptions opt;
    opt.candidate_paths = 3;
    AttackPlanner planner(fa, profile, params, 4.0, opt);
    for (const auto& trace : planner.traces()) {
        CAPTURE(trace.candidate);
        const double best = exhaustive_best(fa, profile, trace.route, trace.route.adders());
        CHECK(trace.final_delay == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("2-bit array: greedy plan dominates every per-adder assignment on its path") {
    Netlist n = build_array_multiplier(2);
    auto profile = skewed(n.input_count());
    AttackPlanner planner(n, profile, AgingParams{}, 4.0);
    const auto& trace = planner.traces()[planner.ranking().front()];
    const double best = exhaustive_best(n, profile, trace.route, trace.route.adders());
    CHECK(trace.final_delay >= best - 1e-12);
}

TEST_CASE("3-bit array: greedy gap against brute force is small") {
    Netlist n = build_array_multiplier(3);
    auto profile = skewed(n.input_count());
    AttackPlanner planner(n, profile, AgingParams{}, 4.0);
    const auto& trace = planner.traces()[planner.ranking().front()];
    auto adders = trace.route.adders();
    REQUIRE(adders.size() <= 6);
    const double best = exhaustive_best(n, profile, trace.route, adders);
    const double gap = (best - trace.final_delay) / best;
    MESSAGE("3-bit greedy gap " << gap);
    CHECK(gap >= -1e-12);
    CHECK(gap < 0.01);
}

TEST_CASE("incremental evaluator equals a full recompute") {
    Netlist n = build_wallace_multiplier(4);
    auto profile = skewed(n.input_count());
    AgingParams params;
    StressEvaluator ev(n, profile, params, 3.0);
    auto rng = stream(17, 0);
    for (int i = 0; i < 25; ++i) {
        const auto id = static_cast<std::uint32_t>(rng() % n.adders().size());
        auto perms = Permutation::all(n.adder(id).inputs.size());
        ev.set(id, perms[rng() % perms.size()]);
    }
    const Netlist& cur = ev.netlist();
    auto states = make_states(compute_stress(cur, profile), params);
    auto full = gate_delays(cur, states, 3.0, params).delay;
    REQUIRE(full.size() == ev.delays().size());
    for (std::size_t g = 0; g < full.size(); ++g) CHECK(ev.delays()[g] == doctest::Approx(full[g]).epsilon(1e-12));
}

TEST_CASE("plans nest and keep the multiplier correct") {
    Netlist n = build_array_multiplier(4);
    AttackPlanner planner(n, InputProfile::uniform(n.input_count()), AgingParams{}, 4.0);
    auto subset = [](const TamperPlan& small, const TamperPlan& big) {
        for (const auto& e : small.entries) {
            auto it = std::find_if(big.entries.begin(), big.entries.end(),
                                   [&](const PlanEntry& x) { return x.adder == e.adder; });
            if (it == big.entries.end() || !(it->permutation == e.permutation)) return false;
        }
        return true;
    };
    auto p25 = planner.plan("M-1-25%"), p50 = planner.plan("M-1-50%"), p100 = planner.plan("M-1-100%"),
         p2 = planner.plan("M-2-100%");
    CHECK(planner.plan("M-0-0").entries.empty());
    CHECK(subset(p25, p50));
    CHECK(subset(p50, p100));
    CHECK(subset(p100, p2));
    auto all = planner.plan("M-All-100%");
    Netlist t = apply_plan(n, all);
    for (std::uint64_t a = 0; a < 16; ++a)
        for (std::uint64_t b = 0; b < 16; ++b) CHECK(multiply(t, a, b) == a * b);
}

TEST_CASE("plan JSON round trip and hash check") {
    Netlist n = build_wallace_multiplier(4);
    AttackPlanner planner(n, InputProfile::uniform(n.input_count()), AgingParams{}, 4.0);
    auto plan = planner.plan("M-All-100%");
    REQUIRE_FALSE(plan.entries.empty());
    nlohmann::json j = plan;
    auto back = j.get<TamperPlan>();
    CHECK(back.config_tag == plan.config_tag);
    CHECK(back.netlist_hash == plan.netlist_hash);
    REQUIRE(back.entries.size() == plan.entries.size());
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
        CHECK(back.entries[i].adder == plan.entries[i].adder);
        CHECK(back.entries[i].permutation == plan.entries[i].permutation);
    }
    CHECK(apply_plan(n, back).to_text() == apply_plan(n, plan).to_text());
    CHECK_THROWS_AS(apply_plan(build_array_multiplier(4), plan), Error);
    CHECK_THROWS_AS(apply_plan(apply_plan(n, plan), plan), Error);
}

TEST_CASE("baselines alter only the path sites") {
    Netlist n = build_array_multiplier(4);
    AttackPlanner planner(n, InputProfile::uniform(n.input_count()), AgingParams{}, 4.0);
    auto sites = path_sites(n, planner.critical_path());
    auto base = make_states(compute_stress(n, planner.profile()), planner.params());
    auto pv = base, dcc = base;
    apply_baseline(pv, sites, BaselineKind::PvTrojan);
    apply_baseline(dcc, sites, BaselineKind::DccTrojan);
    std::size_t changed = 0;
    for (std::size_t s = 0; s < base.size(); ++s) {
        const bool on = std::find(sites.begin(), sites.end(), s) != sites.end();
        if (on) {
            CHECK(pv[s].vth0 == doctest::Approx(base[s].vth0 * 1.1));
            CHECK(dcc[s].alpha == 0.9);
            ++changed;
        } else {
            CHECK(pv[s].vth0 == base[s].vth0);
            CHECK(dcc[s].alpha == base[s].alpha);
        }
    }
    CHECK(changed == sites.size());
    BaselineParams bad;
    bad.forced_alpha_high = 0.3;
    CHECK_THROWS_AS(bad.validate(), Error);
}
