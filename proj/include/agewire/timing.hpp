#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "agewire/aging.hpp"
#include "agewire/circuit.hpp"

namespace agewire {

/// A primary-input to primary-output chain of gates.
struct PathDescriptor {
    SignalId source;
    std::vector<GateId> gates;
    double static_delay = 0.0;
    std::vector<std::uint32_t> adders;  // distinct, in path order
};

struct PathSearch {
    std::vector<PathDescriptor> paths;
    bool fewer_than_requested = false;
};

/// Latest arrival time of every signal (primary inputs at 0).
std::vector<double> arrival_times(const Netlist& netlist, std::span<const double> delays);
/// Longest remaining delay from each signal to any primary output (-inf if none).
std::vector<double> tail_times(const Netlist& netlist, std::span<const double> delays);
double static_max_delay(const Netlist& netlist, std::span<const double> delays);

/// Top-k longest paths, non-increasing delay, ties by lexicographic
/// (source, gate ids) order.
PathSearch static_critical_paths(const Netlist& netlist, std::span<const double> delays, std::size_t k);

/// Adder-level view of a path that survives rewiring: consecutive waypoint
/// signals joined by a block (an adder, or a standalone gate).
struct PathRoute {
    struct Hop {
        std::int32_t adder = -1;  // -1: standalone gate
        GateId gate;               // standalone gate when adder == -1
        SignalId entry;
        SignalId exit;
    };
    SignalId source;
    std::vector<Hop> hops;

    std::vector<std::uint32_t> adders() const;
};

PathRoute route_of(const Netlist& netlist, const PathDescriptor& path);
/// Longest delay along the route under the netlist's current wiring.
double route_delay(const Netlist& netlist, const PathRoute& route, std::span<const double> delays);
/// Gate-level realization of the route under the current wiring.
PathDescriptor realize(const Netlist& netlist, const PathRoute& route, std::span<const double> delays);

/// Transport-delay simulation of one input transition. Each signal's
/// waveform is built in topological order from its inputs' toggle times, so
/// glitches are kept as events.
class TransitionSimulator {
public:
    TransitionSimulator(const Netlist& netlist, std::span<const double> delays,
                        std::size_t event_budget = std::size_t{1} << 22);

    /// Time of the last primary-output event (0 if none).
    double settle_time(std::uint64_t prev, std::uint64_t next);
    /// As settle_time, and samples every primary output at `latch_time`
    /// (bit k = output k; events at exactly latch_time are included).
    double settle_time(std::uint64_t prev, std::uint64_t next, double latch_time, std::uint64_t& latched);

private:
    void set_initial(std::uint64_t prev);
    void run(std::uint64_t next);

    const Netlist& netlist_;
    std::span<const double> delays_;
    std::size_t budget_;
    std::vector<std::uint8_t> initial_;
    std::uint64_t initial_for_ = ~std::uint64_t{0};
    bool initial_valid_ = false;
    std::vector<double> times_;
    std::vector<std::uint32_t> begin_;
    std::vector<std::uint32_t> end_;
};

double settle_time(const Netlist& netlist, std::uint64_t prev, std::uint64_t next, std::span<const double> delays);

enum class StimulusKind : std::uint8_t {
    Exhaustive,     // all-zeros -> every one of 2^N vectors (N <= 16)
    RandomPairs,    // random prev -> random next
    RandomVectors,  // all-zeros -> random next
};

struct StimulusMode {
    StimulusKind kind = StimulusKind::Exhaustive;
    std::size_t count = 0;
    std::uint64_t seed = 0;

    static StimulusMode exhaustive() { return {}; }
    static StimulusMode random_pairs(std::size_t count, std::uint64_t seed) {
        return {StimulusKind::RandomPairs, count, seed};
    }
    static StimulusMode random_vectors(std::size_t count, std::uint64_t seed) {
        return {StimulusKind::RandomVectors, count, seed};
    }

    std::size_t size(const Netlist& netlist) const;
    /// (prev, next) for stimulus i.
    std::pair<std::uint64_t, std::uint64_t> at(const Netlist& netlist, std::size_t i) const;
    void validate(const Netlist& netlist) const;
    std::string str() const;
};

inline constexpr std::size_t kMaxExhaustiveStimulusInputs = 16;

struct DelayReport {
    double t_years = 0.0;
    double max_delay = 0.0;
    double avg_delay = 0.0;
    std::size_t count = 0;
    std::vector<double> per_input;
};

DelayReport delay_sweep(const Netlist& netlist, std::span<const double> delays, const StimulusMode& stimulus,
                        double t_years = 0.0, bool keep_per_input = false, std::size_t threads = 0);
DelayReport delay_sweep(const Netlist& netlist, const StressMap& stress, double t_years, const AgingParams& params,
                        const StimulusMode& stimulus, bool keep_per_input = false, std::size_t threads = 0);

/// Worst natural-aging delay of the untampered design at the horizon
/// (nominal corner, no process variation).
struct GuardBand {
    double p_d = 0.0;
    double horizon_years = 4.0;
    double fresh_max_delay = 0.0;  // untampered t = 0, used for normalization
    Architecture arch = Architecture::Custom;
    int width = 0;
    std::uint64_t netlist_hash = 0;
    StimulusMode stimulus;
};

GuardBand compute_guard_band(const Netlist& untampered, const StressMap& stress, const AgingParams& params,
                             double horizon_years = 4.0, const StimulusMode& stimulus = StimulusMode::exhaustive(),
                             std::size_t threads = 0);

struct ErrorReport {
    double t_years = 0.0;
    double violation_fraction = 0.0;
    std::size_t violations = 0;
    std::size_t evaluated = 0;
    double confidence = 0.0;  // 95% half-width (0 when exhaustive)
};

ErrorReport error_likelihood(const Netlist& netlist, std::span<const double> delays, double t_years,
                             const GuardBand& guard, std::size_t threads = 0);

/// CSV header and rows `t_years,metric,value,config_tag,norm_base`.
void write_report_header(std::ostream& os);
void write_report_rows(std::ostream& os, const DelayReport& report, const std::string& tag, double norm_base);
void write_report_rows(std::ostream& os, const ErrorReport& report, const std::string& tag, double norm_base);
/// Little-endian (u32 input_index, f64 settle_time) records.
void write_settle_binary(std::ostream& os, const DelayReport& report);

}  // namespace agewire
