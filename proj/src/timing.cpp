#include "agewire/timing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <limits>
#include <ostream>
#include <queue>

#include "agewire/parallel.hpp"
#include "agewire/rng.hpp"

namespace agewire {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error("timing", what); }

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_delays(const Netlist& netlist, std::span<const double> delays) {
    if (delays.size() != netlist.gate_count()) fail("delay vector does not cover every gate");
}

std::uint64_t input_mask(std::size_t n) { return n >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n) - 1; }

}  // namespace

std::vector<double> arrival_times(const Netlist& netlist, std::span<const double> delays) {
    check_delays(netlist, delays);
    std::vector<double> arrival(netlist.signal_count(), 0.0);
    for (std::size_t g = 0; g < netlist.gate_count(); ++g) {
        const Gate& gate = netlist.gates()[g];
        double a = 0.0;
        for (auto s : gate.pins()) a = std::max(a, arrival[s.index]);
        arrival[gate.output.index] = a + delays[g];
    }
    return arrival;
}

std::vector<double> tail_times(const Netlist& netlist, std::span<const double> delays) {
    check_delays(netlist, delays);
    std::vector<double> tail(netlist.signal_count(), kNegInf);
    for (auto s : netlist.outputs()) tail[s.index] = 0.0;
    for (std::size_t g = netlist.gate_count(); g-- > 0;) {
        const Gate& gate = netlist.gates()[g];
        double t = tail[gate.output.index];
        if (t == kNegInf) continue;
        for (auto s : gate.pins()) tail[s.index] = std::max(tail[s.index], t + delays[g]);
    }
    return tail;
}

double static_max_delay(const Netlist& netlist, std::span<const double> delays) {
    auto arrival = arrival_times(netlist, delays);
    double best = 0.0;
    for (auto s : netlist.outputs()) best = std::max(best, arrival[s.index]);
    return best;
}

PathSearch static_critical_paths(const Netlist& netlist, std::span<const double> delays, std::size_t k) {
    if (k < 1) fail("k must be >= 1");
    auto tail = tail_times(netlist, delays);
    auto is_output = netlist.output_mask();

    struct Item {
        double bound;
        double prefix;
        std::vector<std::uint32_t> signals;  // source, then gate outputs
        bool done;
    };
    auto worse = [](const Item& a, const Item& b) {
        if (a.bound != b.bound) return a.bound < b.bound;
        if (a.signals != b.signals) return a.signals > b.signals;
        return a.done < b.done;
    };
    std::priority_queue<Item, std::vector<Item>, decltype(worse)> heap(worse);
    for (std::uint32_t i = 0; i < netlist.input_count(); ++i)
        if (tail[i] != kNegInf) heap.push({tail[i], 0.0, {i}, false});

    PathSearch result;
    while (!heap.empty() && result.paths.size() < k) {
        Item item = heap.top();
        heap.pop();
        if (item.done) {
            PathDescriptor path;
            path.source = SignalId{item.signals.front()};
            for (std::size_t i = 1; i < item.signals.size(); ++i)
                path.gates.push_back(netlist.driver(SignalId{item.signals[i]}));
            path.static_delay = item.prefix;
            for (auto g : path.gates) {
                auto a = netlist.adder_of(g);
                if (a >= 0 && std::find(path.adders.begin(), path.adders.end(), static_cast<std::uint32_t>(a)) ==
                                  path.adders.end())
                    path.adders.push_back(static_cast<std::uint32_t>(a));
            }
            result.paths.push_back(std::move(path));
            continue;
        }
        const std::uint32_t last = item.signals.back();
        if (is_output[last] && item.signals.size() > 1) heap.push({item.prefix, item.prefix, item.signals, true});
        for (auto g : netlist.fanout()[last]) {
            const Gate& gate = netlist.gate(g);
            double t = tail[gate.output.index];
            if (t == kNegInf) continue;
            Item next{item.prefix + delays[g.index] + t, item.prefix + delays[g.index], item.signals, false};
            next.signals.push_back(gate.output.index);
            heap.push(std::move(next));
        }
    }
    result.fewer_than_requested = result.paths.size() < k;
    return result;
}

// --- Routes ----------------------------------------------------------------

std::vector<std::uint32_t> PathRoute::adders() const {
    std::vector<std::uint32_t> out;
    for (const auto& h : hops)
        if (h.adder >= 0 && std::find(out.begin(), out.end(), static_cast<std::uint32_t>(h.adder)) == out.end())
            out.push_back(static_cast<std::uint32_t>(h.adder));
    return out;
}

PathRoute route_of(const Netlist& netlist, const PathDescriptor& path) {
    PathRoute route;
    route.source = path.source;
    SignalId entry = path.source;
    for (std::size_t i = 0; i < path.gates.size(); ++i) {
        GateId g = path.gates[i];
        std::int32_t a = netlist.adder_of(g);
        if (a < 0) {
            route.hops.push_back({-1, g, entry, netlist.gate(g).output});
            entry = netlist.gate(g).output;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < path.gates.size() && netlist.adder_of(path.gates[j + 1]) == a) ++j;
        SignalId exit = netlist.gate(path.gates[j]).output;
        route.hops.push_back({a, g, entry, exit});
        entry = exit;
        i = j;
    }
    return route;
}

namespace {

// Longest entry -> exit delay inside an adder; fills `via` with the realized gates when non-null.
double adder_hop(const Netlist& netlist, const AdderInstance& adder, SignalId entry, SignalId exit,
                 std::span<const double> delays, std::vector<GateId>* via) {
    struct Best {
        std::uint32_t signal;
        double time;
        std::int32_t from;  // index into members of predecessor gate, -1 = entry
    };
    std::vector<Best> best;
    best.push_back({entry.index, 0.0, -1});
    auto lookup = [&](std::uint32_t s) -> const Best* {
        for (const auto& b : best)
            if (b.signal == s) return &b;
        return nullptr;
    };
    std::vector<std::int32_t> member_of_signal;
    for (std::size_t m = 0; m < adder.members.size(); ++m) {
        const Gate& gate = netlist.gate(adder.members[m]);
        double t = kNegInf;
        for (auto s : gate.pins())
            if (const Best* b = lookup(s.index)) t = std::max(t, b->time);
        if (t == kNegInf) continue;
        best.push_back({gate.output.index, t + delays[adder.members[m].index], static_cast<std::int32_t>(m)});
    }
    const Best* end = lookup(exit.index);
    if (!end) fail("route broken inside adder " + std::to_string(adder.id));
    if (via) {
        std::vector<GateId> chain;
        const Best* cur = end;
        while (cur->from >= 0) {
            const Gate& gate = netlist.gate(adder.members[cur->from]);
            chain.push_back(adder.members[cur->from]);
            const Best* prev = nullptr;
            for (auto s : gate.pins()) {
                const Best* b = lookup(s.index);
                if (b && std::abs(b->time + delays[adder.members[cur->from].index] - cur->time) == 0.0) {
                    prev = b;
                    break;
                }
            }
            if (!prev) fail("route reconstruction failed");
            cur = prev;
        }
        via->insert(via->end(), chain.rbegin(), chain.rend());
    }
    return end->time;
}

}  // namespace

double route_delay(const Netlist& netlist, const PathRoute& route, std::span<const double> delays) {
    check_delays(netlist, delays);
    double total = 0.0;
    for (const auto& h : route.hops) {
        if (h.adder < 0)
            total += delays[h.gate.index];
        else
            total += adder_hop(netlist, netlist.adder(static_cast<std::uint32_t>(h.adder)), h.entry, h.exit, delays,
                               nullptr);
    }
    return total;
}

PathDescriptor realize(const Netlist& netlist, const PathRoute& route, std::span<const double> delays) {
    PathDescriptor path;
    path.source = route.source;
    for (const auto& h : route.hops) {
        if (h.adder < 0) {
            path.gates.push_back(h.gate);
            path.static_delay += delays[h.gate.index];
        } else {
            path.static_delay += adder_hop(netlist, netlist.adder(static_cast<std::uint32_t>(h.adder)), h.entry, h.exit,
                                           delays, &path.gates);
        }
    }
    path.adders = route.adders();
    return path;
}

// --- Transition simulation -------------------------------------------------

TransitionSimulator::TransitionSimulator(const Netlist& netlist, std::span<const double> delays,
                                         std::size_t event_budget)
    : netlist_(netlist), delays_(delays), budget_(event_budget) {
    check_delays(netlist, delays);
    if (netlist.input_count() > 64) fail("transition simulation supports at most 64 primary inputs");
    initial_.resize(netlist.signal_count());
    begin_.resize(netlist.signal_count());
    end_.resize(netlist.signal_count());
}

void TransitionSimulator::set_initial(std::uint64_t prev) {
    if (initial_valid_ && initial_for_ == prev) return;
    for (std::size_t i = 0; i < netlist_.input_count(); ++i) initial_[i] = (prev >> i) & 1U;
    for (const auto& g : netlist_.gates()) {
        auto p = g.pins();
        initial_[g.output.index] = eval_gate(g.kind, initial_[p[0].index], p.size() > 1 && initial_[p[1].index],
                                             p.size() > 2 && initial_[p[2].index]);
    }
    initial_for_ = prev;
    initial_valid_ = true;
}

void TransitionSimulator::run(std::uint64_t next) {
    times_.clear();
    const std::size_t n_in = netlist_.input_count();
    for (std::size_t i = 0; i < n_in; ++i) {
        begin_[i] = static_cast<std::uint32_t>(times_.size());
        if (((next >> i) & 1U) != initial_[i]) times_.push_back(0.0);
        end_[i] = static_cast<std::uint32_t>(times_.size());
    }
    const auto& gates = netlist_.gates();
    for (std::size_t g = 0; g < gates.size(); ++g) {
        const Gate& gate = gates[g];
        const std::uint32_t out = gate.output.index;
        begin_[out] = static_cast<std::uint32_t>(times_.size());
        auto pins = gate.pins();
        const std::size_t n = pins.size();
        std::uint32_t pos[3] = {0, 0, 0}, stop[3] = {0, 0, 0};
        bool value[3] = {false, false, false};
        bool any = false;
        for (std::size_t p = 0; p < n; ++p) {
            pos[p] = begin_[pins[p].index];
            stop[p] = end_[pins[p].index];
            value[p] = initial_[pins[p].index];
            any = any || pos[p] != stop[p];
        }
        if (any) {
            bool current = initial_[out];
            const double d = delays_[g];
            for (;;) {
                double t = std::numeric_limits<double>::infinity();
                for (std::size_t p = 0; p < n; ++p)
                    if (pos[p] != stop[p]) t = std::min(t, times_[pos[p]]);
                if (t == std::numeric_limits<double>::infinity()) break;
                for (std::size_t p = 0; p < n; ++p)
                    while (pos[p] != stop[p] && times_[pos[p]] == t) {
                        value[p] = !value[p];
                        ++pos[p];
                    }
                bool v = eval_gate(gate.kind, value[0], value[1], value[2]);
                if (v != current) {
                    current = v;
                    times_.push_back(t + d);
                }
            }
            if (times_.size() > budget_) fail("event budget exceeded during transition simulation");
        }
        end_[out] = static_cast<std::uint32_t>(times_.size());
    }
}

double TransitionSimulator::settle_time(std::uint64_t prev, std::uint64_t next) {
    set_initial(prev);
    run(next);
    double settle = 0.0;
    for (auto s : netlist_.outputs())
        if (end_[s.index] != begin_[s.index]) settle = std::max(settle, times_[end_[s.index] - 1]);
    return settle;
}

double TransitionSimulator::settle_time(std::uint64_t prev, std::uint64_t next, double latch_time,
                                       std::uint64_t& latched) {
    double settle = settle_time(prev, next);
    latched = 0;
    const auto& outs = netlist_.outputs();
    for (std::size_t k = 0; k < outs.size(); ++k) {
        const std::uint32_t s = outs[k].index;
        bool v = initial_[s];
        for (std::uint32_t i = begin_[s]; i < end_[s] && times_[i] <= latch_time; ++i) v = !v;
        if (v) latched |= std::uint64_t{1} << k;
    }
    return settle;
}

double settle_time(const Netlist& netlist, std::uint64_t prev, std::uint64_t next, std::span<const double> delays) {
    const std::uint64_t mask = input_mask(netlist.input_count());
    if ((prev & ~mask) || (next & ~mask)) fail("input vector wider than the primary inputs");
    TransitionSimulator sim(netlist, delays);
    return sim.settle_time(prev, next);
}

// --- Stimuli and sweeps ----------------------------------------------------

std::size_t StimulusMode::size(const Netlist& netlist) const {
    return kind == StimulusKind::Exhaustive ? std::size_t{1} << netlist.input_count() : count;
}

std::pair<std::uint64_t, std::uint64_t> StimulusMode::at(const Netlist& netlist, std::size_t i) const {
    const std::uint64_t mask = input_mask(netlist.input_count());
    switch (kind) {
        case StimulusKind::Exhaustive: return {0, i};
        case StimulusKind::RandomPairs: return {key(seed, i, 0) & mask, key(seed, i, 1) & mask};
        case StimulusKind::RandomVectors: return {0, key(seed, i, 1) & mask};
    }
    return {0, 0};
}

void StimulusMode::validate(const Netlist& netlist) const {
    if (kind == StimulusKind::Exhaustive) {
        if (netlist.input_count() > kMaxExhaustiveStimulusInputs)
            fail("EXHAUSTIVE stimuli limited to width <= 8 (" + std::to_string(kMaxExhaustiveStimulusInputs) +
                 " primary inputs)");
    } else if (count == 0) {
        fail("random stimulus mode needs count >= 1");
    }
}

std::string StimulusMode::str() const {
    switch (kind) {
        case StimulusKind::Exhaustive: return "EXHAUSTIVE";
        case StimulusKind::RandomPairs: return "RANDOM_PAIRS(" + std::to_string(count) + "," + std::to_string(seed) + ")";
        case StimulusKind::RandomVectors:
            return "RANDOM_VECTORS(" + std::to_string(count) + "," + std::to_string(seed) + ")";
    }
    return "";
}

DelayReport delay_sweep(const Netlist& netlist, std::span<const double> delays, const StimulusMode& stimulus,
                        double t_years, bool keep_per_input, std::size_t threads) {
    stimulus.validate(netlist);
    check_delays(netlist, delays);
    const std::size_t n = stimulus.size(netlist);
    std::vector<double> settle(n);
    parallel_blocks(
        n,
        [&](std::size_t begin, std::size_t end) {
            TransitionSimulator sim(netlist, delays);
            for (std::size_t i = begin; i < end; ++i) {
                auto [prev, next] = stimulus.at(netlist, i);
                settle[i] = sim.settle_time(prev, next);
            }
        },
        threads);
    DelayReport r;
    r.t_years = t_years;
    r.count = n;
    double sum = 0.0;
    for (double s : settle) {
        r.max_delay = std::max(r.max_delay, s);
        sum += s;
    }
    r.avg_delay = n ? sum / static_cast<double>(n) : 0.0;
    if (keep_per_input) r.per_input = std::move(settle);
    return r;
}

DelayReport delay_sweep(const Netlist& netlist, const StressMap& stress, double t_years, const AgingParams& params,
                        const StimulusMode& stimulus, bool keep_per_input, std::size_t threads) {
    auto states = make_states(stress, params);
    auto delays = gate_delays(netlist, states, t_years, params);
    return delay_sweep(netlist, delays.delay, stimulus, t_years, keep_per_input, threads);
}

GuardBand compute_guard_band(const Netlist& untampered, const StressMap& stress, const AgingParams& params,
                             double horizon_years, const StimulusMode& stimulus, std::size_t threads) {
    if (!untampered.untampered()) fail("guard band must be computed on the untampered netlist");
    if (!(horizon_years >= 0)) fail("negative guard-band horizon");
    GuardBand guard;
    guard.horizon_years = horizon_years;
    guard.arch = untampered.architecture();
    guard.width = untampered.width();
    guard.netlist_hash = untampered.content_hash();
    guard.stimulus = stimulus;
    guard.p_d = delay_sweep(untampered, stress, horizon_years, params, stimulus, false, threads).max_delay;
    guard.fresh_max_delay =
        horizon_years == 0 ? guard.p_d : delay_sweep(untampered, stress, 0.0, params, stimulus, false, threads).max_delay;
    return guard;
}

ErrorReport error_likelihood(const Netlist& netlist, std::span<const double> delays, double t_years,
                             const GuardBand& guard, std::size_t threads) {
    if (netlist.architecture() != guard.arch || netlist.width() != guard.width)
        fail("guard band was computed for a different architecture or width");
    auto report = delay_sweep(netlist, delays, guard.stimulus, t_years, true, threads);
    ErrorReport e;
    e.t_years = t_years;
    e.evaluated = report.count;
    e.violations = static_cast<std::size_t>(
        std::count_if(report.per_input.begin(), report.per_input.end(), [&](double s) { return s > guard.p_d; }));
    e.violation_fraction = e.evaluated ? static_cast<double>(e.violations) / static_cast<double>(e.evaluated) : 0.0;
    if (guard.stimulus.kind != StimulusKind::Exhaustive && e.evaluated > 0)
        e.confidence =
            1.96 * std::sqrt(e.violation_fraction * (1.0 - e.violation_fraction) / static_cast<double>(e.evaluated));
    return e;
}

void write_report_header(std::ostream& os) { os << "t_years,metric,value,config_tag,norm_base\n"; }

void write_report_rows(std::ostream& os, const DelayReport& report, const std::string& tag, double norm_base) {
    os << std::setprecision(12);
    os << report.t_years << ",max_delay," << report.max_delay / norm_base << ',' << tag << ',' << norm_base << '\n';
    os << report.t_years << ",avg_delay," << report.avg_delay / norm_base << ',' << tag << ',' << norm_base << '\n';
}

void write_report_rows(std::ostream& os, const ErrorReport& report, const std::string& tag, double norm_base) {
    os << std::setprecision(12);
    os << report.t_years << ",violation_fraction," << report.violation_fraction << ',' << tag << ',' << norm_base
       << '\n';
    os << report.t_years << ",violation_ci95," << report.confidence << ',' << tag << ',' << norm_base << '\n';
}

void write_settle_binary(std::ostream& os, const DelayReport& report) {
    for (std::size_t i = 0; i < report.per_input.size(); ++i) {
        unsigned char rec[12];
        auto idx = static_cast<std::uint32_t>(i);
        std::uint64_t bits;
        std::memcpy(&bits, &report.per_input[i], 8);
        for (int b = 0; b < 4; ++b) rec[b] = static_cast<unsigned char>(idx >> (8 * b));
        for (int b = 0; b < 8; ++b) rec[4 + b] = static_cast<unsigned char>(bits >> (8 * b));
        os.write(reinterpret_cast<const char*>(rec), sizeof rec);
    }
}

}  // namespace agewire
