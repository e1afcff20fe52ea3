#include "agewire/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "agewire/hash.hpp"
#include "agewire/inference.hpp"
#include "agewire/parallel.hpp"
#include "agewire/rng.hpp"
#include "agewire/timing.hpp"

#ifndef AGEWIRE_SOURCE_DIR
#define AGEWIRE_SOURCE_DIR "."
#endif

namespace agewire {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error("cli", what); }

constexpr std::array<std::string_view, 7> kExperimentNames = {
    "STRESS_HIST", "DELAY_VS_TIME", "BITWIDTH_SCALING", "MONTE_CARLO", "ERROR_LIKELIHOOD", "BASELINE_COMPARE",
    "INFERENCE_CURVE"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

bool is_baseline(const std::string& tag) { return tag == "PV_TROJAN" || tag == "DCC_TROJAN"; }

std::string file_tag(std::string tag) {
    std::string out;
    for (char c : tag) out += c == '%' ? std::string("pct") : std::string(1, c);
    return out;
}

std::string design_key(Architecture arch, int width) {
    return std::string(to_string(arch)) + "-" + std::to_string(width);
}

struct Design {
    Netlist net;
    InputProfile profile;
};

Design make_design(const ExperimentConfig& c, Architecture arch, int width) {
    Design d{build_multiplier(arch, width), {}};
    const std::size_t n = d.net.input_count();
    d.profile = n <= kMaxExhaustiveInputs ? InputProfile::uniform(n, c.input_alpha)
                                          : InputProfile::sampled(n, c.profile_samples, key(c.seed, 0x57), c.input_alpha);
    return d;
}

StimulusMode stimulus_for(const ExperimentConfig& c, const Netlist& net) {
    const std::uint64_t seed = key(c.seed, 0x5d);
    if (c.stimulus == "EXHAUSTIVE") return StimulusMode::exhaustive();
    if (c.stimulus == "RANDOM_VECTORS") return StimulusMode::random_vectors(c.stimulus_count, seed);
    if (c.stimulus == "RANDOM_PAIRS") return StimulusMode::random_pairs(c.stimulus_count, seed);
    return net.input_count() <= kMaxExhaustiveStimulusInputs ? StimulusMode::exhaustive()
                                                             : StimulusMode::random_vectors(c.stimulus_count, seed);
}

struct Attacked {
    Netlist net;
    std::vector<TransistorState> states;
    std::optional<TamperPlan> plan;
};

Attacked attack(AttackPlanner& planner, const std::string& tag, const BaselineParams& baseline) {
    const Netlist& base = planner.netlist();
    if (is_baseline(tag)) {
        Attacked a{base, make_states(compute_stress(base, planner.profile()), planner.params()), std::nullopt};
        apply_baseline(a.states, path_sites(base, planner.critical_path()), parse_baseline(tag), baseline);
        return a;
    }
    auto plan = planner.plan(tag);
    Netlist net = apply_plan(base, plan);
    auto states = make_states(compute_stress(net, planner.profile()), planner.params());
    return {std::move(net), std::move(states), std::move(plan)};
}

// Collects output files and the netlist-hash section of the manifest.
struct Outputs {
    std::map<std::string, std::string> files;
    nlohmann::json netlists = nlohmann::json::object();
    nlohmann::json extra = nlohmann::json::object();

    void plan(const TamperPlan& p) { files["plans/" + file_tag(p.config_tag) + ".json"] = nlohmann::json(p).dump(2) + "\n"; }
};

std::string series_script(const std::string& csv, const std::string& ylabel, const std::string& metric,
                          const std::vector<std::string>& tags, const std::string& xlabel = "t (years)") {
    std::ostringstream os;
    const std::string stem = csv.substr(0, csv.find('.'));
    os << "# gnuplot " << stem << ".gp  ->  " << stem << ".png\n"
       << "set datafile separator ','\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << stem << ".png'\n"
       << "set key left top\n"
       << "set grid\n"
       << "set xlabel '" << xlabel << "'\n"
       << "set ylabel '" << ylabel << "'\n"
       << "plot \\\n";
    for (std::size_t i = 0; i < tags.size(); ++i) {
        os << "  '" << csv << "' using 1:((strcol(2) eq '" << metric << "' && strcol(4) eq '" << tags[i]
           << "') ? $3 : 1/0) with linespoints title '" << tags[i] << "'" << (i + 1 < tags.size() ? ", \\\n" : "\n");
    }
    return os.str();
}

const char* kSeriesHeader = "t_years,metric,value,config_tag,norm_base\n";

void row(std::ostringstream& os, double t, const std::string& metric, double value, const std::string& tag,
         double norm) {
    os << num(t) << ',' << metric << ',' << num(value) << ',' << tag << ',' << num(norm) << '\n';
}

// --- Experiments ---------------------------------------------------------------

void stress_hist(const ExperimentConfig& c, Outputs& out) {
    Design d = make_design(c, c.architecture, c.width);
    AttackPlanner planner(d.net, d.profile, c.aging, c.horizon_years);
    out.netlists[design_key(c.architecture, c.width)] = hex64(d.net.content_hash());
    std::ostringstream hist, summary;
    hist << "bin_lo,bin_hi,count,fraction,config_tag,norm_base\n";
    summary << "config_tag,sites,mean_alpha,variance,sites_alpha_ge_0p7,norm_base\n";
    const auto tags = c.resolved_attacks();
    for (const auto& tag : tags) {
        if (is_baseline(tag)) fail("STRESS_HIST takes rewiring configurations only, not " + tag);
        auto plan = planner.plan(tag);
        Netlist net = apply_plan(d.net, plan);
        out.plan(plan);
        auto stress = compute_stress(net, d.profile);
        auto counts = stress_histogram(stress, c.histogram_bins);
        const double sites = static_cast<double>(stress.alpha.size());
        for (std::size_t b = 0; b < counts.size(); ++b) {
            const double lo = static_cast<double>(b) / static_cast<double>(counts.size());
            const double hi = static_cast<double>(b + 1) / static_cast<double>(counts.size());
            hist << num(lo) << ',' << num(hi) << ',' << counts[b] << ',' << num(static_cast<double>(counts[b]) / sites)
                 << ',' << tag << ',' << num(sites) << '\n';
        }
        double mean = 0;
        std::size_t high = 0;
        for (double a : stress.alpha) {
            mean += a;
            high += a >= 0.7 ? 1 : 0;
        }
        summary << tag << ',' << stress.alpha.size() << ',' << num(mean / sites) << ','
                << num(stress_variance(stress)) << ',' << high << ',' << num(sites) << '\n';
        std::ostringstream csv;
        write_stress_csv(csv, net, stress);
        out.files["stress/" + file_tag(tag) + ".csv"] = csv.str();
        out.netlists[design_key(c.architecture, c.width) + "/" + tag] = hex64(net.content_hash());
    }
    out.files["stress_hist.csv"] = hist.str();
    out.files["stress_summary.csv"] = summary.str();
    std::ostringstream gp;
    gp << "# gnuplot stress_hist.gp  ->  stress_hist.png\n"
       << "set datafile separator ','\nset terminal pngcairo size 900,600\nset output 'stress_hist.png'\n"
       << "set style data histograms\nset style fill solid 0.6\nset boxwidth 0.4 relative\nset grid\n"
       << "set xlabel 'alpha = P(gate input = 0)'\nset ylabel 'fraction of PMOS sites'\nplot \\\n";
    for (std::size_t i = 0; i < tags.size(); ++i)
        gp << "  'stress_hist.csv' using (($1+$2)/2 + " << num(0.02 * static_cast<double>(i))
           << "):(strcol(5) eq '" << tags[i] << "' ? $4 : 1/0) with boxes title '" << tags[i] << "'"
           << (i + 1 < tags.size() ? ", \\\n" : "\n");
    out.files["stress_hist.gp"] = gp.str();
}

void delay_vs_time(const ExperimentConfig& c, Outputs& out) {
    Design d = make_design(c, c.architecture, c.width);
    AttackPlanner planner(d.net, d.profile, c.aging, c.horizon_years);
    out.netlists[design_key(c.architecture, c.width)] = hex64(d.net.content_hash());
    const StimulusMode stim = stimulus_for(c, d.net);
    const std::size_t threads = default_threads();
    auto base_states = make_states(compute_stress(d.net, d.profile), c.aging);
    auto base0 = gate_delays(d.net, base_states, 0.0, c.aging).delay;
    const double norm_dyn = delay_sweep(d.net, base0, stim, 0.0, false, threads).max_delay;
    const double norm_static = static_max_delay(d.net, base0);
    std::ostringstream csv;
    csv << kSeriesHeader;
    const auto tags = c.resolved_attacks();
    for (const auto& tag : tags) {
        Attacked a = attack(planner, tag, c.baseline);
        if (a.plan) out.plan(*a.plan);
        out.netlists[design_key(c.architecture, c.width) + "/" + tag] = hex64(a.net.content_hash());
        for (double t : c.time_grid) {
            auto delays = gate_delays(a.net, a.states, t, c.aging);
            auto r = delay_sweep(a.net, delays.delay, stim, t, false, threads);
            row(csv, t, "max_delay", r.max_delay / norm_dyn, tag, norm_dyn);
            row(csv, t, "avg_delay", r.avg_delay / norm_dyn, tag, norm_dyn);
            row(csv, t, "static_max_delay", static_max_delay(a.net, delays.delay) / norm_static, tag, norm_static);
        }
    }
    out.extra["stimulus"] = stim.str();
    out.files["delay_vs_time.csv"] = csv.str();
    out.files["delay_vs_time.gp"] = series_script("delay_vs_time.csv", "normalized max delay", "max_delay", tags);
}

void bitwidth_scaling(const ExperimentConfig& c, Outputs& out) {
    std::ostringstream csv;
    csv << "architecture,width,config_tag,t_years,untampered_max,tampered_max,relative_delta,norm_base\n";
    const auto tags = c.resolved_attacks();
    for (auto arch : c.architectures)
        for (int w : c.widths) {
            Design d = make_design(c, arch, w);
            AttackPlanner planner(d.net, d.profile, c.aging, c.horizon_years);
            out.netlists[design_key(arch, w)] = hex64(d.net.content_hash());
            auto base_states = make_states(compute_stress(d.net, d.profile), c.aging);
            const double norm = static_max_delay(d.net, gate_delays(d.net, base_states, 0.0, c.aging).delay);
            const double untampered =
                static_max_delay(d.net, gate_delays(d.net, base_states, c.horizon_years, c.aging).delay);
            for (const auto& tag : tags) {
                Attacked a = attack(planner, tag, c.baseline);
                if (a.plan) {
                    a.plan->config_tag = design_key(arch, w) + "_" + a.plan->config_tag;
                    out.plan(*a.plan);
                }
                out.netlists[design_key(arch, w) + "/" + tag] = hex64(a.net.content_hash());
                const double tampered =
                    static_max_delay(a.net, gate_delays(a.net, a.states, c.horizon_years, c.aging).delay);
                csv << to_string(arch) << ',' << w << ',' << tag << ',' << num(c.horizon_years) << ','
                    << num(untampered / norm) << ',' << num(tampered / norm) << ','
                    << num((tampered - untampered) / untampered) << ',' << num(norm) << '\n';
            }
        }
    out.files["bitwidth_scaling.csv"] = csv.str();
    std::ostringstream gp;
    gp << "# gnuplot bitwidth_scaling.gp  ->  bitwidth_scaling.png\n"
       << "set datafile separator ','\nset terminal pngcairo size 900,600\nset output 'bitwidth_scaling.png'\n"
       << "set grid\nset key left top\nset xlabel 'operand width (bits)'\n"
       << "set ylabel 'relative max-delay increase at horizon'\nplot \\\n";
    for (std::size_t i = 0; i < c.architectures.size(); ++i) {
        const std::string arch(to_string(c.architectures[i]));
        gp << "  'bitwidth_scaling.csv' using 2:(strcol(1) eq '" << arch << "' ? $7 : 1/0) with linespoints title '"
           << arch << "'" << (i + 1 < c.architectures.size() ? ", \\\n" : "\n");
    }
    out.files["bitwidth_scaling.gp"] = gp.str();
}

void monte_carlo(const ExperimentConfig& c, Outputs& out) {
    Design d = make_design(c, c.architecture, c.width);
    AttackPlanner planner(d.net, d.profile, c.aging, c.horizon_years);
    out.netlists[design_key(c.architecture, c.width)] = hex64(d.net.content_hash());
    auto base_states = make_states(compute_stress(d.net, d.profile), c.aging);
    const double norm = static_max_delay(d.net, gate_delays(d.net, base_states, 0.0, c.aging).delay);
    MonteCarloConfig mc;
    mc.iterations = c.mc_iterations;
    mc.seed = c.seed;
    mc.alpha_mode = c.mc_alpha_mode;
    mc.avg_samples = c.mc_avg_samples;
    mc.time_points = c.mc_time_points;
    std::ostringstream csv;
    csv << kSeriesHeader;
    const auto tags = c.resolved_attacks();
    nlohmann::json saturated = nlohmann::json::object();
    for (const auto& tag : tags) {
        if (is_baseline(tag)) fail("MONTE_CARLO takes rewiring configurations only, not " + tag);
        auto plan = planner.plan(tag);
        out.plan(plan);
        Netlist net = apply_plan(d.net, plan);
        out.netlists[design_key(c.architecture, c.width) + "/" + tag] = hex64(net.content_hash());
        auto r = run_monte_carlo(net, d.profile, mc, c.aging);
        saturated[tag] = r.saturated_iterations;
        for (const auto& p : r.points) {
            auto emit = [&](const std::string& metric, const Percentiles& s) {
                row(csv, p.t_years, metric + "_p5", s.p5 / norm, tag, norm);
                row(csv, p.t_years, metric + "_p25", s.p25 / norm, tag, norm);
                row(csv, p.t_years, metric + "_median", s.median / norm, tag, norm);
                row(csv, p.t_years, metric + "_p75", s.p75 / norm, tag, norm);
                row(csv, p.t_years, metric + "_p95", s.p95 / norm, tag, norm);
                row(csv, p.t_years, metric + "_mean", s.mean / norm, tag, norm);
            };
            emit("max_delay", p.max_summary);
            emit("avg_delay", p.avg_summary);
        }
    }
    out.extra["monte_carlo"] = {{"iterations", mc.iterations},
                                {"alpha_mode", std::string(to_string(mc.alpha_mode))},
                                {"avg_samples", mc.avg_samples},
                                {"saturated_iterations", saturated}};
    out.files["monte_carlo.csv"] = csv.str();
    out.files["monte_carlo.gp"] =
        series_script("monte_carlo.csv", "normalized max delay (median)", "max_delay_median", tags);
}

void error_series(const ExperimentConfig& c, Outputs& out, const std::string& stem) {
    Design d = make_design(c, c.architecture, c.width);
    AttackPlanner planner(d.net, d.profile, c.aging, c.horizon_years);
    out.netlists[design_key(c.architecture, c.width)] = hex64(d.net.content_hash());
    const StimulusMode stim = stimulus_for(c, d.net);
    const std::size_t threads = default_threads();
    auto guard = compute_guard_band(d.net, compute_stress(d.net, d.profile), c.aging, c.horizon_years, stim, threads);
    std::ostringstream csv;
    csv << kSeriesHeader;
    const auto tags = c.resolved_attacks();
    for (const auto& tag : tags) {
        Attacked a = attack(planner, tag, c.baseline);
        if (a.plan) out.plan(*a.plan);
        out.netlists[design_key(c.architecture, c.width) + "/" + tag] = hex64(a.net.content_hash());
        for (double t : c.time_grid) {
            auto delays = gate_delays(a.net, a.states, t, c.aging);
            auto e = error_likelihood(a.net, delays.delay, t, guard, threads);
            row(csv, t, "violation_fraction", e.violation_fraction, tag, guard.fresh_max_delay);
            row(csv, t, "violation_ci95", e.confidence, tag, guard.fresh_max_delay);
            row(csv, t, "violations", static_cast<double>(e.violations), tag, guard.fresh_max_delay);
        }
    }
    out.extra["guard_band"] = {{"p_d", guard.p_d},
                               {"horizon_years", guard.horizon_years},
                               {"fresh_max_delay", guard.fresh_max_delay},
                               {"stimulus", stim.str()}};
    out.files[stem + ".csv"] = csv.str();
    out.files[stem + ".gp"] = series_script(stem + ".csv", "error likelihood", "violation_fraction", tags);
}

std::string resolve_model(const std::string& path) {
    if (std::filesystem::exists(path)) return path;
    auto alt = std::filesystem::path(AGEWIRE_SOURCE_DIR) / path;
    if (std::filesystem::exists(alt)) return alt.string();
    fail("model file not found: " + path);
}

void inference_curve(const ExperimentConfig& c, Outputs& out) {
    const FpFormat format = FpFormat::reduced8();
    if (c.width != format.significand_bits())
        fail("INFERENCE_CURVE needs width " + std::to_string(format.significand_bits()) + " (8-bit significand)");
    Design d = make_design(c, c.architecture, c.width);
    AttackPlanner planner(d.net, d.profile, c.aging, c.horizon_years);
    out.netlists[design_key(c.architecture, c.width)] = hex64(d.net.content_hash());
    const std::size_t threads = default_threads();
    const ToyModel model = load_toy_model(resolve_model(c.model_path));
    auto guard = compute_guard_band(d.net, compute_stress(d.net, d.profile), c.aging, c.horizon_years,
                                    StimulusMode::exhaustive(), threads);
    const double clean = evaluate_accuracy(model, format, nullptr, threads);
    std::ostringstream csv;
    csv << kSeriesHeader;
    const auto tags = c.resolved_attacks();
    for (const auto& tag : tags) {
        Attacked a = attack(planner, tag, c.baseline);
        if (a.plan) out.plan(*a.plan);
        out.netlists[design_key(c.architecture, c.width) + "/" + tag] = hex64(a.net.content_hash());
        for (double t : c.time_grid) {
            auto delays = gate_delays(a.net, a.states, t, c.aging);
            auto table = build_fault_table(a.net, delays.delay, t, guard, StimulusMode::exhaustive(), threads);
            const double acc = evaluate_accuracy(model, format, &table, threads);
            row(csv, t, "accuracy", acc, tag, clean);
            row(csv, t, "faulty_entries", static_cast<double>(table.faulty_count()), tag, clean);
            if (c.write_fault_tables) {
                std::ostringstream bin;
                table.write(bin);
                out.files["fault_tables/" + file_tag(tag) + "_t" + num(t) + ".bin"] = bin.str();
            }
        }
    }
    out.extra["inference"] = {{"model", model.name},
                              {"test_samples", model.test_labels.size()},
                              {"fault_free_accuracy", clean},
                              {"significand_bits", format.significand_bits()}};
    out.files["inference_curve.csv"] = csv.str();
    out.files["inference_curve.gp"] = series_script("inference_curve.csv", "top-1 accuracy", "accuracy", tags);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) { return kExperimentNames[static_cast<std::size_t>(kind)]; }

ExperimentKind parse_experiment(std::string_view text) {
    for (std::size_t i = 0; i < kExperimentNames.size(); ++i)
        if (kExperimentNames[i] == text) return static_cast<ExperimentKind>(i);
    fail("unknown experiment '" + std::string(text) + "'");
}

std::vector<std::string> ExperimentConfig::resolved_attacks() const {
    if (!attacks.empty()) return attacks;
    switch (experiment) {
        case ExperimentKind::StressHist: return {"M-0-0", "M-All-100%"};
        case ExperimentKind::DelayVsTime: return {"M-0-0", "M-1-25%", "M-1-50%", "M-1-75%", "M-1-100%"};
        case ExperimentKind::BitwidthScaling: return {"F-10%"};
        case ExperimentKind::MonteCarlo: return {"M-0-0", "M-1-50%", "M-1-100%", "M-2-100%", "M-All-100%"};
        case ExperimentKind::ErrorLikelihood: return {"M-0-0", "M-1-100%", "M-All-100%"};
        case ExperimentKind::BaselineCompare: return {"M-1-100%", "M-All-100%", "PV_TROJAN", "DCC_TROJAN"};
        case ExperimentKind::InferenceCurve: return {"M-0-0", "M-1-100%", "M-All-100%"};
    }
    return {};
}

void ExperimentConfig::validate() const {
    auto check_width = [](int w) {
        if (w < 2 || w > 16) fail("width must be in [2, 16]");
    };
    check_width(width);
    for (int w : widths) check_width(w);
    if (time_grid.empty() || !std::is_sorted(time_grid.begin(), time_grid.end())) fail("time grid must be sorted");
    for (double t : time_grid)
        if (!(t >= 0)) fail("time grid must be non-negative");
    if (!(horizon_years > 0)) fail("horizon_years must be > 0");
    if (!(input_alpha >= 0 && input_alpha <= 1)) fail("input_alpha must be in [0, 1]");
    if (stimulus != "AUTO" && stimulus != "EXHAUSTIVE" && stimulus != "RANDOM_VECTORS" && stimulus != "RANDOM_PAIRS")
        fail("stimulus must be AUTO, EXHAUSTIVE, RANDOM_VECTORS or RANDOM_PAIRS");
    if (stimulus != "AUTO" && stimulus != "EXHAUSTIVE" && stimulus_count == 0) fail("stimulus_count must be >= 1");
    if (histogram_bins < 2) fail("histogram_bins must be >= 2");
    MonteCarloConfig mc;
    mc.iterations = mc_iterations;
    mc.avg_samples = mc_avg_samples;
    mc.time_points = mc_time_points;
    mc.validate();
    baseline.validate();
    aging.validate();
    for (const auto& tag : resolved_attacks())
        if (!is_baseline(tag)) ConfigTag::parse(tag);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
    std::vector<std::string> archs;
    for (auto a : c.architectures) archs.emplace_back(to_string(a));
    j = {{"experiment", std::string(to_string(c.experiment))},
         {"architecture", std::string(to_string(c.architecture))},
         {"width", c.width},
         {"architectures", archs},
         {"widths", c.widths},
         {"attacks", c.resolved_attacks()},
         {"time_grid", c.time_grid},
         {"seed", c.seed},
         {"horizon_years", c.horizon_years},
         {"input_alpha", c.input_alpha},
         {"profile_samples", c.profile_samples},
         {"stimulus", c.stimulus},
         {"stimulus_count", c.stimulus_count},
         {"histogram_bins", c.histogram_bins},
         {"mc_iterations", c.mc_iterations},
         {"mc_alpha_mode", std::string(to_string(c.mc_alpha_mode))},
         {"mc_avg_samples", c.mc_avg_samples},
         {"mc_time_points", c.mc_time_points},
         {"baseline",
          {{"vth_boost_fraction", c.baseline.vth_boost_fraction},
           {"forced_alpha_high", c.baseline.forced_alpha_high}}},
         {"model_path", c.model_path},
         {"write_fault_tables", c.write_fault_tables},
         {"aging", c.aging},
         {"output_dir", c.output_dir}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
    static const std::set<std::string> known = {
        "experiment", "architecture", "width", "architectures", "widths", "attacks", "time_grid", "seed",
        "horizon_years", "input_alpha", "profile_samples", "stimulus", "stimulus_count", "histogram_bins",
        "mc_iterations", "mc_alpha_mode", "mc_avg_samples", "mc_time_points", "baseline", "model_path",
        "write_fault_tables", "aging", "output_dir"};
    if (!j.is_object()) fail("config must be a JSON object");
    for (const auto& [k, v] : j.items())
        if (!known.count(k)) fail("unknown config key '" + k + "'");
    c = ExperimentConfig{};
    if (j.contains("experiment")) c.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("architecture")) c.architecture = parse_architecture(j.at("architecture").get<std::string>());
    if (j.contains("architectures")) {
        c.architectures.clear();
        for (const auto& a : j.at("architectures")) c.architectures.push_back(parse_architecture(a.get<std::string>()));
    }
    auto get = [&](const char* name, auto& field) {
        if (j.contains(name)) field = j.at(name).get<std::decay_t<decltype(field)>>();
    };
    get("width", c.width);
    get("widths", c.widths);
    get("attacks", c.attacks);
    get("time_grid", c.time_grid);
    get("seed", c.seed);
    get("horizon_years", c.horizon_years);
    get("input_alpha", c.input_alpha);
    get("profile_samples", c.profile_samples);
    get("stimulus", c.stimulus);
    get("stimulus_count", c.stimulus_count);
    get("histogram_bins", c.histogram_bins);
    get("mc_iterations", c.mc_iterations);
    if (j.contains("mc_alpha_mode")) c.mc_alpha_mode = parse_alpha_mode(j.at("mc_alpha_mode").get<std::string>());
    get("mc_avg_samples", c.mc_avg_samples);
    get("mc_time_points", c.mc_time_points);
    if (j.contains("baseline")) {
        const auto& b = j.at("baseline");
        c.baseline.vth_boost_fraction = b.value("vth_boost_fraction", c.baseline.vth_boost_fraction);
        c.baseline.forced_alpha_high = b.value("forced_alpha_high", c.baseline.forced_alpha_high);
    }
    get("model_path", c.model_path);
    get("write_fault_tables", c.write_fault_tables);
    if (j.contains("aging")) c.aging = j.at("aging").get<AgingParams>();
    get("output_dir", c.output_dir);
    c.validate();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    Outputs out;
    switch (config.experiment) {
        case ExperimentKind::StressHist: stress_hist(config, out); break;
        case ExperimentKind::DelayVsTime: delay_vs_time(config, out); break;
        case ExperimentKind::BitwidthScaling: bitwidth_scaling(config, out); break;
        case ExperimentKind::MonteCarlo: monte_carlo(config, out); break;
        case ExperimentKind::ErrorLikelihood: error_series(config, out, "error_likelihood"); break;
        case ExperimentKind::BaselineCompare: error_series(config, out, "baseline_compare"); break;
        case ExperimentKind::InferenceCurve: inference_curve(config, out); break;
    }
    ExperimentResult result;
    result.files = std::move(out.files);
    nlohmann::json cfg = config;
    cfg.erase("output_dir");
    nlohmann::json outputs = nlohmann::json::array();
    for (const auto& [path, contents] : result.files)
        outputs.push_back({{"path", path}, {"bytes", contents.size()}, {"fnv1a64", hex64(fnv1a64(contents))}});
    result.manifest = {{"tool", "agewire"},
                       {"version", kToolVersion},
                       {"experiment", std::string(to_string(config.experiment))},
                       {"config", cfg},
                       {"config_hash", hex64(fnv1a64(cfg.dump()))},
                       {"seeds", {{"seed", config.seed}}},
                       {"netlist_hashes", out.netlists},
                       {"details", out.extra},
                       {"outputs", outputs},
                       {"wall_clock_seconds",
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()}};
    return result;
}

void write_outputs(const ExperimentResult& result, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail("cannot create output directory " + dir + ": " + ec.message());
    auto write = [&](const std::string& rel, const std::string& contents) {
        const fs::path path = fs::path(dir) / rel;
        fs::create_directories(path.parent_path(), ec);
        const fs::path tmp = path.string() + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary);
            if (!f) fail("cannot write " + tmp.string());
            f << contents;
            if (!f) fail("short write on " + tmp.string());
        }
        fs::rename(tmp, path, ec);
        if (ec) fail("cannot move " + tmp.string() + " into place: " + ec.message());
    };
    for (const auto& [rel, contents] : result.files) write(rel, contents);
    write("manifest.json", result.manifest.dump(2) + "\n");
}

VerifyReport verify_manifest(const std::string& manifest_path, const std::string& output_dir) {
    std::ifstream in(manifest_path);
    if (!in) fail("cannot open manifest " + manifest_path);
    nlohmann::json m;
    try {
        in >> m;
    } catch (const std::exception& e) {
        fail("manifest " + manifest_path + " is not valid JSON: " + e.what());
    }
    VerifyReport r;
    for (const auto& o : m.at("outputs")) {
        const auto rel = o.at("path").get<std::string>();
        const auto path = std::filesystem::path(output_dir) / rel;
        ++r.checked;
        std::ifstream f(path, std::ios::binary);
        if (!f) {
            r.missing.push_back(rel);
            continue;
        }
        std::ostringstream ss;
        ss << f.rdbuf();
        if (hex64(fnv1a64(ss.str())) != o.at("fnv1a64").get<std::string>()) r.mismatched.push_back(rel);
    }
    r.ok = r.missing.empty() && r.mismatched.empty();
    return r;
}

}  // namespace agewire
