// Acceptance run: one PASS/FAIL line per criterion, with the measured values.
// Exit status is non-zero only if a check could not be executed; a FAIL line
// is a measured outcome, not a crash.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "agewire/attack.hpp"
#include "agewire/experiment.hpp"
#include "agewire/hash.hpp"
#include "agewire/inference.hpp"
#include "agewire/montecarlo.hpp"
#include "agewire/parallel.hpp"
#include "agewire/rng.hpp"

using namespace agewire;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    Outcome() { detail << std::setprecision(9); }

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [violated: " << what << "]";
        }
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::ofstream report_file;  // optional copy of stdout, shown by ctest after the run

void emit(const std::string& line) {
    std::cout << line << std::endl;
    if (report_file) report_file << line << std::endl;
}

void report(int n, Outcome& o, double secs) {
    std::ostringstream os;
    os << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " (" << secs << " s)" << o.detail.str();
    emit(os.str());
}

// Shared 8-bit array context.
struct Array8 {
    Netlist net = build_array_multiplier(8);
    InputProfile profile = InputProfile::uniform(16);
    AgingParams params;
    AttackPlanner planner{net, profile, params, 4.0};
    StressMap stress = compute_stress(net, profile);
    GuardBand guard = compute_guard_band(net, stress, params, 4.0);
};

Array8& array8() {
    static Array8 a;
    return a;
}

Outcome criterion1() {
    Outcome o;
    std::size_t checked = 0, mismatches = 0;
    for (auto arch : {Architecture::Array, Architecture::Wallace})
        for (int w : {6, 8}) {
            Netlist n = build_multiplier(arch, w);
            AttackPlanner planner(n, InputProfile::uniform(n.input_count()), AgingParams{}, 4.0);
            for (const char* tag : {"M-1-100%", "M-All-100%"}) {
                Netlist t = apply_plan(n, planner.plan(tag));
                const std::uint64_t m = 1ULL << w;
                std::vector<std::size_t> bad(m, 0);
                parallel_for(m, [&](std::size_t a) {
                    for (std::uint64_t b = 0; b < m; ++b) bad[a] += multiply(t, a, b) != a * b ? 1 : 0;
                });
                for (auto b : bad) mismatches += b;
                checked += m * m;
            }
        }
    o.detail << " vectors=" << checked << " mismatches=" << mismatches;
    o.require(mismatches == 0, "zero mismatches");
    return o;
}

Outcome criterion2() {
    using big = boost::multiprecision::cpp_bin_float_50;
    Outcome o;
    auto rng = stream(20240601, 0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    for (int i = 0; i < 25; ++i) {
        AgingParams p;
        const double alpha = 0.01 + 0.99 * u(rng), t = 0.05 + 10 * u(rng);
        p.k_p = 1e-9 * (0.5 + 3 * u(rng));
        p.lambda = 0.1 + 0.4 * u(rng);
        p.beta = 0.6 * u(rng);
        const big inner = big(p.k_p) * big(p.k_p) * big(alpha) * big(t) * big(p.t_data_per_year);
        const big denom = 1 - boost::multiprecision::pow(big(p.beta), 1 / (2 * big(p.lambda)));
        const double want =
            static_cast<double>(boost::multiprecision::pow(boost::multiprecision::sqrt(inner) / denom, 2 * big(p.lambda)));
        worst = std::max(worst, std::abs(delta_vth(alpha, t, p) - want) / want);
    }
    AgingParams p;
    const bool zeros = delta_vth(0.0, 4.0, p) == 0.0 && delta_vth(0.6, 0.0, p) == 0.0;
    o.detail << " points=25 worst_rel_err=" << worst << " exact_zeros=" << zeros;
    o.require(worst <= 1e-12, "rel err <= 1e-12");
    o.require(zeros, "delta_vth(0,t) = delta_vth(a,0) = 0");
    return o;
}

Outcome criterion3() {
    Outcome o;
    auto& a = array8();
    auto base = compute_stress(a.net, a.profile);
    auto tampered = compute_stress(apply_plan(a.net, a.planner.plan("M-All-100%")), a.profile);
    auto high = [](const StressMap& s) { return std::count_if(s.alpha.begin(), s.alpha.end(), [](double x) { return x >= 0.7; }); };
    const double v0 = stress_variance(base), v1 = stress_variance(tampered);
    o.detail << " var M-0-0=" << v0 << " M-All-100%=" << v1 << "; sites alpha>=0.7: " << high(base) << " -> "
             << high(tampered);
    o.require(v1 > v0, "variance increases");
    o.require(high(tampered) > high(base), "count alpha>=0.7 increases");
    return o;
}

Outcome criterion4() {
    Outcome o;
    const std::vector<std::string> tags = {"M-0-0", "M-1-25%", "M-1-50%", "M-1-75%", "M-1-100%"};
    for (auto arch : {Architecture::Array, Architecture::Wallace}) {
        Netlist n = build_multiplier(arch, 8);
        auto profile = InputProfile::uniform(16);
        AgingParams params;
        AttackPlanner planner(n, profile, params, 4.0);
        auto fresh = make_states(compute_stress(n, profile), params);
        const auto fresh0 = gate_delays(n, fresh, 0.0, params).delay;
        const double norm = delay_sweep(n, fresh0, StimulusMode::exhaustive()).max_delay;
        const double norm_static = static_max_delay(n, fresh0);
        std::vector<double> v, st;
        for (const auto& tag : tags) {
            Netlist t = apply_plan(n, planner.plan(tag));
            auto states = make_states(compute_stress(t, profile), params);
            const auto aged = gate_delays(t, states, 4.0, params).delay;
            v.push_back(delay_sweep(t, aged, StimulusMode::exhaustive()).max_delay / norm);
            st.push_back(static_max_delay(t, aged) / norm_static);
        }
        o.detail << ' ' << to_string(arch) << "-8 @4y:";
        for (std::size_t i = 0; i < v.size(); ++i) o.detail << ' ' << tags[i] << '=' << v[i];
        const std::string a(to_string(arch));
        o.require(v[0] < v[1], a + " M-0-0 < M-1-25%");
        for (std::size_t i = 1; i + 1 < v.size(); ++i) o.require(v[i] <= v[i + 1], a + " " + tags[i] + " <= " + tags[i + 1]);
        o.require((v[4] - v[0]) / v[0] >= 1e-3, a + " M-1-100% at least 0.1% above M-0-0");
        o.detail << " sep=" << 100 * (v[4] - v[0]) / v[0] << "% (static STA:";
        for (double x : st) o.detail << ' ' << x;
        o.detail << ");";
    }
    for (auto arch : {Architecture::Array, Architecture::Wallace}) {
        std::map<int, double> delta;
        for (int w : {6, 16}) {
            Netlist n = build_multiplier(arch, w);
            const std::size_t inputs = n.input_count();
            auto profile = inputs <= kMaxExhaustiveInputs ? InputProfile::uniform(inputs)
                                                          : InputProfile::sampled(inputs, 16384, key(1, 0x57));
            AgingParams params;
            AttackPlanner planner(n, profile, params, 4.0);
            Netlist t = apply_plan(n, planner.plan("F-10%"));
            auto s0 = make_states(compute_stress(n, profile), params);
            auto s1 = make_states(compute_stress(t, profile), params);
            const double d0 = static_max_delay(n, gate_delays(n, s0, 4.0, params).delay);
            const double d1 = static_max_delay(t, gate_delays(t, s1, 4.0, params).delay);
            delta[w] = (d1 - d0) / d0;
        }
        o.detail << ' ' << to_string(arch) << " F-10% delta(6)=" << delta[6] << " delta(16)=" << delta[16] << ';';
        o.require(delta[16] > delta[6], std::string(to_string(arch)) + " delta(16) > delta(6)");
    }
    return o;
}

Outcome criterion5() {
    Outcome o;
    auto& a = array8();
    const std::vector<std::string> tags = {"M-0-0", "M-1-50%", "M-1-100%", "M-2-100%", "M-All-100%"};
    MonteCarloConfig mc;  // 5000 iterations, UNIFORM_0P1_0P9, seed 1
    std::map<std::string, MonteCarloResult> r;
    const auto t0 = Clock::now();
    for (const auto& tag : tags) r[tag] = run_monte_carlo(apply_plan(a.net, a.planner.plan(tag)), a.profile, mc, a.params);
    const double secs = seconds_since(t0);
    auto med = [&](const std::string& t) { return r[t].points.back().max_summary.median; };
    auto avg = [&](const std::string& t) { return r[t].points.back().avg_summary.mean; };
    o.detail << " iterations=" << mc.iterations << " x " << tags.size() << " configs in " << secs << " s; @4y median max "
             << "M-0-0=" << med("M-0-0") << " M-1-100%=" << med("M-1-100%") << "; mean avg";
    for (std::size_t i = 1; i < tags.size(); ++i) o.detail << ' ' << tags[i] << '=' << avg(tags[i]);
    o.require(secs < 600, "under 10 minutes");
    o.require(med("M-0-0") < med("M-1-100%"), "median max M-0-0 < M-1-100%");
    for (std::size_t i = 1; i + 1 < tags.size(); ++i)
        o.require(avg(tags[i]) <= avg(tags[i + 1]), "mean avg " + tags[i] + " <= " + tags[i + 1]);

    MonteCarloConfig small = mc;
    small.iterations = 200;
    Netlist t = apply_plan(a.net, a.planner.plan("M-1-100%"));
    small.threads = 1;
    auto one = run_monte_carlo(t, a.profile, small, a.params);
    small.threads = 4;
    auto four = run_monte_carlo(t, a.profile, small, a.params);
    bool same = true;
    for (std::size_t k = 0; k < one.points.size(); ++k)
        same = same && one.points[k].max_delay == four.points[k].max_delay &&
               one.points[k].avg_delay == four.points[k].avg_delay;
    o.detail << "; 1 vs 4 threads (200 it) identical=" << same;
    o.require(same, "bit-identical across worker counts");
    return o;
}

// Error-likelihood series shared by criteria 6, 7 and 9.
const std::vector<double> kGrid = {0, 0.5, 1, 2, 3, 4};

std::map<std::string, AttackSeries>& error_series() {
    static std::map<std::string, AttackSeries> s = [] {
        auto& a = array8();
        std::map<std::string, AttackSeries> out;
        for (auto& series : compare_attacks(a.planner, {"M-0-0", "M-1-100%", "M-All-100%", "PV_TROJAN", "DCC_TROJAN"},
                                            kGrid, a.guard))
            out[series.tag] = series;
        return out;
    }();
    return s;
}

Outcome criterion6() {
    Outcome o;
    auto& s = error_series();
    for (const char* tag : {"M-0-0", "M-1-100%", "M-All-100%"}) {
        const auto& r = s.at(tag).reports;
        o.detail << ' ' << tag << ':';
        for (const auto& e : r) o.detail << ' ' << e.violation_fraction;
        o.require(r.front().violation_fraction == 0, std::string(tag) + " zero at t=0");
        for (std::size_t i = 1; i < r.size(); ++i)
            o.require(r[i].violation_fraction >= r[i - 1].violation_fraction, std::string(tag) + " non-decreasing");
        o.detail << ';';
    }
    const double all = s.at("M-All-100%").reports.back().violation_fraction;
    const double one = s.at("M-1-100%").reports.back().violation_fraction;
    o.require(all > one, "M-All-100% > M-1-100% at 4y");
    o.require(one > 0, "M-1-100% > 0 at 4y");
    return o;
}

Outcome criterion7() {
    Outcome o;
    auto& s = error_series();
    const double all = s.at("M-All-100%").reports.back().violation_fraction;
    const double dcc = s.at("DCC_TROJAN").reports.back().violation_fraction;
    const double pv = s.at("PV_TROJAN").reports.back().violation_fraction;
    o.detail << " @4y M-All-100%=" << all << " DCC_TROJAN=" << dcc << " PV_TROJAN=" << pv
             << " (PV_TROJAN @0y=" << s.at("PV_TROJAN").reports.front().violation_fraction << ")";
    o.require(all >= dcc, "M-All-100% >= DCC_TROJAN");
    o.require(dcc >= pv, "DCC_TROJAN >= PV_TROJAN");
    return o;
}

Outcome criterion8() {
    Outcome o;
    auto exhaustive_best = [](const Netlist& n, const InputProfile& profile, const PathRoute& route) {
        StressEvaluator ev(n, profile, AgingParams{}, 4.0);
        auto adders = route.adders();
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
        };
        go(0);
        return best;
    };
    auto skewed = [](std::size_t n) {
        auto p = InputProfile::uniform(n);
        for (std::size_t i = 0; i < n; ++i) p.alpha_in[i] = 0.15 + 0.7 * static_cast<double>(i) / static_cast<double>(n);
        return p;
    };
    {
        Netlist fa = build_full_adder_netlist();
        auto profile = skewed(3);
        AttackOptions opt;
        opt.candidate_paths = 3;
        AttackPlanner planner(fa, profile, AgingParams{}, 4.0, opt);
        double worst = 0;
        for (const auto& t : planner.traces())
            worst = std::max(worst, std::abs(t.final_delay - exhaustive_best(fa, profile, t.route)));
        o.detail << " single FA |greedy - exhaustive|=" << worst << ';';
        o.require(worst == 0, "single-FA greedy equals exhaustive best");
    }
    for (auto* profile_name : {"uniform", "skewed"}) {
        Netlist n = build_array_multiplier(2);
        auto profile = std::string(profile_name) == "uniform" ? InputProfile::uniform(4) : skewed(4);
        AttackPlanner planner(n, profile, AgingParams{}, 4.0);
        const auto& t = planner.traces()[planner.ranking().front()];
        const double best = exhaustive_best(n, profile, t.route);
        o.detail << " 2-bit " << profile_name << " greedy=" << t.final_delay << " brute=" << best << ';';
        o.require(t.final_delay >= best - 1e-12, std::string("2-bit greedy >= brute force (") + profile_name + ")");
    }
    return o;
}

Outcome criterion9() {
    Outcome o;
    auto& a = array8();
    const FpFormat f = FpFormat::reduced8();
    const ToyModel model = load_toy_model(AGEWIRE_SOURCE_DIR "/data/digits_mlp.json");
    const double clean = evaluate_accuracy(model, f, nullptr);
    o.detail << " fault-free=" << clean << ';';
    std::map<std::string, double> at4;
    for (const char* tag : {"M-0-0", "M-1-100%", "M-All-100%"}) {
        Netlist t = apply_plan(a.net, a.planner.plan(tag));
        auto states = make_states(compute_stress(t, a.profile), a.params);
        const auto& errors = error_series().at(tag).reports;
        bool violated = false;
        o.detail << ' ' << tag << ':';
        for (std::size_t i = 0; i < kGrid.size(); ++i) {
            violated = violated || errors[i].violations > 0;
            auto table = build_fault_table(t, gate_delays(t, states, kGrid[i], a.params).delay, kGrid[i], a.guard);
            const double acc = evaluate_accuracy(model, f, &table);
            o.detail << ' ' << acc << "(" << table.faulty_count() << ")";
            if (!violated) o.require(acc == clean, std::string(tag) + " accuracy before first violation equals fault-free");
            if (kGrid[i] == 4.0) at4[tag] = acc;
        }
        o.detail << ';';
    }
    o.require(at4["M-All-100%"] < clean, "M-All-100% at 4y below fault-free");
    o.require(at4["M-All-100%"] <= at4["M-1-100%"], "M-All-100% <= M-1-100% at 4y");
    return o;
}

Outcome criterion10() {
    Outcome o;
    auto checksums = [](const ExperimentResult& r) {
        std::map<std::string, std::string> out;
        for (const auto& [path, contents] : r.files) out[path] = hex64(fnv1a64(contents));
        return out;
    };
    auto strip = [](nlohmann::json m) {
        m.erase("wall_clock_seconds");
        return m;
    };
    std::vector<ExperimentConfig> configs(3);
    configs[0].experiment = ExperimentKind::StressHist;
    configs[1].experiment = ExperimentKind::ErrorLikelihood;
    configs[1].time_grid = {0, 4};
    configs[2].experiment = ExperimentKind::MonteCarlo;
    configs[2].mc_iterations = 24;
    std::size_t files = 0;
    for (auto& c : configs) {
        setenv("AGEWIRE_THREADS", "1", 1);
        auto r1 = run_experiment(c);
        setenv("AGEWIRE_THREADS", "3", 1);
        auto r2 = run_experiment(c);
        unsetenv("AGEWIRE_THREADS");
        files += r1.files.size();
        const std::string name(to_string(c.experiment));
        o.require(checksums(r1) == checksums(r2), name + " output checksums identical");
        o.require(strip(r1.manifest) == strip(r2.manifest), name + " manifests identical");
    }
    o.detail << " experiments=3 files=" << files << " (runs at 1 and 3 workers)";
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) report_file.open(argv[1], std::ios::trunc);
    const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                            criterion6, criterion7, criterion8, criterion9, criterion10};
    int errors = 0, failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = Clock::now();
        try {
            Outcome o = criteria[i]();
            report(static_cast<int>(i + 1), o, seconds_since(t0));
            failed += o.pass ? 0 : 1;
        } catch (const std::exception& e) {
            emit("criterion " + std::to_string(i + 1) + ": FAIL (error: " + e.what() + ")");
            ++errors;
        }
    }
    emit("summary: " + std::to_string(criteria.size() - static_cast<std::size_t>(failed + errors)) + " PASS, " +
         std::to_string(failed) + " FAIL, " + std::to_string(errors) + " errors");
    return errors == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
