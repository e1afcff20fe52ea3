#include "agewire/attack.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "agewire/hash.hpp"

namespace agewire {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error("attack", what); }

std::size_t ceil_percent(double percent, std::size_t n) {
    return static_cast<std::size_t>(std::ceil(percent / 100.0 * static_cast<double>(n) - 1e-9));
}

std::string format_percent(double p) {
    if (p == std::floor(p)) return std::to_string(static_cast<long long>(p)) + "%";
    std::string s = std::to_string(p);
    while (s.back() == '0') s.pop_back();
    return s + "%";
}

}  // namespace

void AttackBudget::validate() const {
    if (k_paths < 1) fail("k_paths must be >= 1");
    if (fraction_percent && !(*fraction_percent >= 0 && *fraction_percent <= 100))
        fail("fraction_percent must be in [0, 100]");
}

// --- Plans -------------------------------------------------------------------

bool TamperPlan::contains(std::uint32_t adder) const {
    return std::any_of(entries.begin(), entries.end(), [&](const PlanEntry& e) { return e.adder == adder; });
}

std::vector<PlanEntry> TamperPlan::sorted_entries() const {
    auto out = entries;
    std::sort(out.begin(), out.end(), [](const PlanEntry& a, const PlanEntry& b) { return a.adder < b.adder; });
    return out;
}

void to_json(nlohmann::json& j, const TamperPlan& plan) {
    nlohmann::json entries = nlohmann::json::array();
    for (std::size_t i = 0; i < plan.entries.size(); ++i) {
        nlohmann::json e = {{"adder", plan.entries[i].adder}, {"permutation", plan.entries[i].permutation.str()}};
        if (i < plan.provenance.size()) {
            e["path"] = plan.provenance[i].path;
            e["iteration"] = plan.provenance[i].iteration;
            e["predicted_gain"] = plan.provenance[i].predicted_gain;
        }
        entries.push_back(std::move(e));
    }
    j = {{"config_tag", plan.config_tag},
         {"netlist_hash", hex64(plan.netlist_hash)},
         {"entries", std::move(entries)},
         {"flags", plan.flags}};
}

void from_json(const nlohmann::json& j, TamperPlan& plan) {
    plan = TamperPlan{};
    plan.config_tag = j.at("config_tag").get<std::string>();
    plan.netlist_hash = std::stoull(j.at("netlist_hash").get<std::string>(), nullptr, 16);
    for (const auto& e : j.at("entries")) {
        PlanEntry entry{e.at("adder").get<std::uint32_t>(), Permutation::parse(e.at("permutation").get<std::string>())};
        if (entry.permutation.is_identity()) fail("plan entry with identity permutation");
        if (plan.contains(entry.adder)) fail("plan has two entries for adder " + std::to_string(entry.adder));
        plan.entries.push_back(entry);
        plan.provenance.push_back({e.value("path", std::int64_t{0}), e.value("iteration", std::size_t{0}),
                                   e.value("predicted_gain", 0.0)});
    }
    if (j.contains("flags")) plan.flags = j.at("flags").get<std::vector<std::string>>();
}

Netlist apply_plan(const Netlist& untampered, const TamperPlan& plan) {
    if (!untampered.untampered()) fail("plans apply to the untampered netlist only");
    if (plan.netlist_hash != untampered.content_hash())
        fail("plan " + plan.config_tag + " was built for netlist " + hex64(plan.netlist_hash) + ", not " +
             hex64(untampered.content_hash()));
    Netlist out = untampered;
    std::set<std::uint32_t> seen;
    for (const auto& e : plan.entries) {
        if (!seen.insert(e.adder).second) fail("plan has two entries for adder " + std::to_string(e.adder));
        if (e.permutation.is_identity()) fail("plan entry with identity permutation");
        rewire(out, e.adder, e.permutation);
    }
    return out;
}

// --- Incremental evaluation ----------------------------------------------------

StressEvaluator::StressEvaluator(const Netlist& netlist, const InputProfile& profile, const AgingParams& params,
                                 double t_years)
    : netlist_(netlist), activity_(netlist, profile), params_(params), t_years_(t_years) {
    params_.validate();
    delays_ = gate_delays(netlist_, make_states(activity_.stress(netlist_), params_), t_years_, params_).delay;
}

void StressEvaluator::set(std::uint32_t adder, const Permutation& absolute) {
    if (netlist_.adder(adder).permutation == absolute) return;
    rewire(netlist_, adder, absolute);
    const auto& members = netlist_.adder(adder).members;
    activity_.resimulate(netlist_, members);
    for (auto g : members) {
        const Gate& gate = netlist_.gate(g);
        std::array<TransistorState, 3> pins{};
        auto p = gate.pins();
        for (std::size_t i = 0; i < p.size(); ++i) pins[i] = {params_.v_th_nominal, activity_.alpha(p[i])};
        delays_[g.index] = gate_delay(gate.kind, std::span(pins.data(), p.size()), t_years_, params_).delay;
    }
}

// --- Configuration tags -----------------------------------------------------------

ConfigTag ConfigTag::parse(std::string_view text) {
    const std::string t(text);
    auto bad = [&]() -> ConfigTag { fail("invalid attack configuration '" + t + "'"); };
    auto percent_of = [&](std::string_view s) {
        if (s.empty() || s.back() != '%') bad();
        s.remove_suffix(1);
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(std::string(s), &used);
        } catch (const std::exception&) {
            bad();
        }
        if (used != s.size()) bad();
        return v;
    };
    ConfigTag tag;
    if (t == "M-0-0") return tag;
    if (t.rfind("F-", 0) == 0) {
        tag.kind = Kind::AdderFraction;
        tag.percent = percent_of(std::string_view(t).substr(2));
        if (!(tag.percent > 0 && tag.percent <= 100)) bad();
        return tag;
    }
    if (t.rfind("M-", 0) != 0) bad();
    auto dash = t.find('-', 2);
    if (dash == std::string::npos) bad();
    std::string x = t.substr(2, dash - 2);
    tag.percent = percent_of(std::string_view(t).substr(dash + 1));
    if (tag.percent != 25 && tag.percent != 50 && tag.percent != 75 && tag.percent != 100) bad();
    if (x == "All" || x == "ALL") {
        tag.kind = Kind::All;
        return tag;
    }
    if (x != "1" && x != "2" && x != "3" && x != "5") bad();
    tag.kind = Kind::Paths;
    tag.paths = static_cast<std::size_t>(x[0] - '0');
    return tag;
}

std::string ConfigTag::str() const {
    switch (kind) {
        case Kind::None: return "M-0-0";
        case Kind::Paths: return "M-" + std::to_string(paths) + "-" + format_percent(percent);
        case Kind::All: return "M-All-" + format_percent(percent);
        case Kind::AdderFraction: return "F-" + format_percent(percent);
    }
    return "";
}

// --- Planner ---------------------------------------------------------------------

AttackPlanner::AttackPlanner(const Netlist& untampered, const InputProfile& profile, const AgingParams& params,
                             double horizon_years, AttackOptions options)
    : base_(untampered), profile_(profile), params_(params), horizon_(horizon_years), options_(options) {
    if (!base_.untampered()) fail("the attack planner needs the untampered netlist");
    if (!(horizon_years > 0)) fail("evaluation horizon must be > 0");
    if (options_.candidate_paths < 1) fail("need at least one candidate path");
    StressEvaluator eval(base_, profile_, params_, horizon_);
    auto search = static_critical_paths(base_, eval.delays(), options_.candidate_paths);
    if (search.paths.empty()) fail("netlist has no input-to-output path");
    candidates_ = std::move(search.paths);
}

bool AttackPlanner::eligible(std::uint32_t adder) const {
    return options_.include_half_adders || base_.adder(adder).kind == AdderKind::Full;
}

const PathDescriptor& AttackPlanner::critical_path() { return candidates_.front(); }

void AttackPlanner::reset(StressEvaluator& eval, std::vector<std::uint32_t>& touched) {
    for (auto a : touched) eval.set(a, Permutation::identity(base_.adder(a).inputs.size()));
    touched.clear();
}

void AttackPlanner::ensure_traces() {
    if (traces_done_) return;
    StressEvaluator eval(base_, profile_, params_, horizon_);
    std::vector<std::uint32_t> touched;
    for (std::size_t c = 0; c < candidates_.size(); ++c) {
        PathTrace tr;
        tr.candidate = c;
        tr.path = candidates_[c];
        tr.route = route_of(base_, tr.path);
        std::vector<std::uint32_t> adders;
        for (auto a : tr.route.adders())
            if (eligible(a)) adders.push_back(a);
        std::sort(adders.begin(), adders.end());
        tr.adder_count = adders.size();
        std::size_t n = options_.n_target;
        if (n != std::numeric_limits<std::size_t>::max() && n > adders.size()) tr.truncated = true;
        n = std::min(n, adders.size());

        double current = route_delay(eval.netlist(), tr.route, eval.delays());
        tr.base_delay = current;
        std::vector<bool> done(adders.size(), false);
        for (std::size_t iter = 0; iter < n; ++iter) {
            GreedyCommit best;
            std::size_t best_slot = adders.size();
            for (std::size_t i = 0; i < adders.size(); ++i) {
                if (done[i]) continue;
                const std::uint32_t a = adders[i];
                const Permutation cur = eval.permutation(a);
                for (const auto& perm : Permutation::all(cur.size())) {
                    if (perm == cur) continue;
                    eval.set(a, perm);
                    const double d = route_delay(eval.netlist(), tr.route, eval.delays());
                    eval.set(a, cur);
                    if (d - current > best.gain) {
                        best = {a, perm, d - current, d};
                        best_slot = i;
                    }
                }
            }
            if (best_slot == adders.size()) break;
            eval.set(best.adder, best.permutation);
            touched.push_back(best.adder);
            done[best_slot] = true;
            current = best.delay_after;
            tr.commits.push_back(best);
        }
        tr.final_delay = current;
        reset(eval, touched);
        traces_.push_back(std::move(tr));
    }
    traces_done_ = true;
}

const std::vector<PathTrace>& AttackPlanner::traces() {
    ensure_traces();
    return traces_;
}

std::vector<std::size_t> AttackPlanner::ranking() {
    ensure_traces();
    std::vector<std::size_t> order(traces_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return traces_[a].final_delay > traces_[b].final_delay; });
    return order;
}

const std::vector<MAllCommit>& AttackPlanner::mall_commits() {
    if (mall_done_) return mall_;
    StressEvaluator eval(base_, profile_, params_, horizon_);
    for (const auto& adder : base_.adders()) {
        if (!eligible(adder.id)) continue;
        auto through = [&] {
            auto arrival = arrival_times(eval.netlist(), eval.delays());
            auto tail = tail_times(eval.netlist(), eval.delays());
            return std::max(arrival[adder.sum.index] + tail[adder.sum.index],
                            arrival[adder.carry.index] + tail[adder.carry.index]);
        };
        const Permutation id = Permutation::identity(adder.inputs.size());
        const double base = through();
        MAllCommit best{adder.id, id, 0.0};
        for (const auto& perm : Permutation::all(adder.inputs.size())) {
            if (perm == id) continue;
            eval.set(adder.id, perm);
            const double gain = through() - base;
            eval.set(adder.id, id);
            if (gain > best.gain) best = {adder.id, perm, gain};
        }
        if (best.gain > 0) {
            eval.set(adder.id, best.permutation);
            mall_.push_back(best);
        }
    }
    mall_done_ = true;
    return mall_;
}

TamperPlan AttackPlanner::plan(const ConfigTag& tag) {
    TamperPlan plan;
    plan.config_tag = tag.str();
    plan.netlist_hash = base_.content_hash();
    auto add = [&](std::uint32_t adder, const Permutation& perm, PlanProvenance prov) {
        if (plan.contains(adder)) return false;
        plan.entries.push_back({adder, perm});
        plan.provenance.push_back(prov);
        return true;
    };
    switch (tag.kind) {
        case ConfigTag::Kind::None: break;
        case ConfigTag::Kind::Paths: {
            auto order = ranking();
            if (tag.paths > order.size()) plan.flags.push_back("fewer candidate paths than requested");
            for (std::size_t r = 0; r < std::min(tag.paths, order.size()); ++r) {
                const PathTrace& tr = traces_[order[r]];
                if (tr.truncated) plan.flags.push_back("n_target exceeds adders on path " + std::to_string(tr.candidate));
                const std::size_t keep = std::min(ceil_percent(tag.percent, tr.adder_count), tr.commits.size());
                for (std::size_t i = 0; i < keep; ++i)
                    add(tr.commits[i].adder, tr.commits[i].permutation,
                        {static_cast<std::int64_t>(tr.candidate), i, tr.commits[i].gain});
            }
            break;
        }
        case ConfigTag::Kind::All: {
            const auto& commits = mall_commits();
            std::vector<std::size_t> order(commits.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return commits[a].gain > commits[b].gain; });
            order.resize(ceil_percent(tag.percent, order.size()));
            std::sort(order.begin(), order.end());
            for (auto i : order) add(commits[i].adder, commits[i].permutation, {-1, i, commits[i].gain});
            break;
        }
        case ConfigTag::Kind::AdderFraction: {
            std::size_t eligible_count = 0;
            for (const auto& a : base_.adders()) eligible_count += eligible(a.id) ? 1 : 0;
            const std::size_t budget = ceil_percent(tag.percent, eligible_count);
            for (auto r : ranking()) {
                const PathTrace& tr = traces_[r];
                for (std::size_t i = 0; i < tr.commits.size() && plan.entries.size() < budget; ++i)
                    add(tr.commits[i].adder, tr.commits[i].permutation,
                        {static_cast<std::int64_t>(tr.candidate), i, tr.commits[i].gain});
            }
            if (plan.entries.size() < budget) plan.flags.push_back("adder budget not exhausted by candidate paths");
            break;
        }
    }
    return plan;
}

TamperPlan run_algorithm1(const Netlist& untampered, const InputProfile& profile, const AttackBudget& budget,
                          double horizon_years, const AgingParams& params) {
    budget.validate();
    AttackOptions options;
    options.candidate_paths = budget.k_paths;
    options.n_target = budget.n_target;
    options.include_half_adders = budget.include_half_adders;
    AttackPlanner planner(untampered, profile, params, horizon_years, options);
    if (budget.fraction_percent) {
        ConfigTag tag{ConfigTag::Kind::Paths, budget.k_paths, *budget.fraction_percent};
        auto plan = planner.plan(tag);
        plan.config_tag = "M-" + std::to_string(budget.k_paths) + "-" + format_percent(*budget.fraction_percent);
        return plan;
    }
    ConfigTag tag{ConfigTag::Kind::Paths, budget.k_paths, 100.0};
    auto plan = planner.plan(tag);
    plan.config_tag = budget.n_target == std::numeric_limits<std::size_t>::max()
                          ? "M-" + std::to_string(budget.k_paths) + "-100%"
                          : "K-" + std::to_string(budget.k_paths) + "-N" + std::to_string(budget.n_target);
    return plan;
}

TamperPlan build_config(const Netlist& untampered, const InputProfile& profile, std::string_view tag,
                        double horizon_years, const AgingParams& params) {
    AttackPlanner planner(untampered, profile, params, horizon_years);
    return planner.plan(tag);
}

// --- Baselines --------------------------------------------------------------------

void BaselineParams::validate() const {
    if (!(vth_boost_fraction > 0)) fail("vth_boost_fraction must be > 0");
    if (!(forced_alpha_high > 0.5 && forced_alpha_high <= 1.0)) fail("forced_alpha_high must be in (0.5, 1]");
}

std::string_view to_string(BaselineKind kind) { return kind == BaselineKind::PvTrojan ? "PV_TROJAN" : "DCC_TROJAN"; }

BaselineKind parse_baseline(std::string_view text) {
    if (text == "PV_TROJAN") return BaselineKind::PvTrojan;
    if (text == "DCC_TROJAN") return BaselineKind::DccTrojan;
    fail("unknown baseline '" + std::string(text) + "'");
}

std::vector<std::size_t> path_sites(const Netlist& netlist, const PathDescriptor& path) {
    std::vector<std::size_t> sites;
    for (auto g : path.gates)
        for (std::size_t p = 0; p < arity(netlist.gate(g).kind); ++p) sites.push_back(netlist.site_index(g, p));
    return sites;
}

void apply_baseline(std::vector<TransistorState>& states, std::span<const std::size_t> sites, BaselineKind kind,
                    const BaselineParams& params) {
    params.validate();
    for (auto s : sites) {
        if (s >= states.size()) fail("baseline target site out of range");
        if (kind == BaselineKind::PvTrojan)
            states[s].vth0 *= 1.0 + params.vth_boost_fraction;
        else
            states[s].alpha = params.forced_alpha_high;
    }
}

std::vector<AttackSeries> compare_attacks(AttackPlanner& planner, const std::vector<std::string>& attacks,
                                          const std::vector<double>& t_grid, const GuardBand& guard,
                                          const BaselineParams& baseline, std::size_t threads) {
    const Netlist& base = planner.netlist();
    std::vector<AttackSeries> out;
    for (const auto& name : attacks) {
        AttackSeries series{name, {}};
        std::vector<TransistorState> states;
        const Netlist* target = &base;
        Netlist tampered;
        if (name == "PV_TROJAN" || name == "DCC_TROJAN") {
            states = make_states(compute_stress(base, planner.profile()), planner.params());
            apply_baseline(states, path_sites(base, planner.critical_path()), parse_baseline(name), baseline);
        } else {
            tampered = apply_plan(base, planner.plan(name));
            target = &tampered;
            states = make_states(compute_stress(tampered, planner.profile()), planner.params());
        }
        for (double t : t_grid) {
            auto delays = gate_delays(*target, states, t, planner.params());
            series.reports.push_back(error_likelihood(*target, delays.delay, t, guard, threads));
        }
        out.push_back(std::move(series));
    }
    return out;
}

}  // namespace agewire
