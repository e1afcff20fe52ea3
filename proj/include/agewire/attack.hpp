#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "agewire/activity.hpp"
#include "agewire/aging.hpp"
#include "agewire/circuit.hpp"
#include "agewire/timing.hpp"

namespace agewire {

struct AttackBudget {
    std::size_t k_paths = 1;
    std::size_t n_target = std::numeric_limits<std::size_t>::max();  // per path; max = every adder
    std::optional<double> fraction_percent;                         // per-path percentage instead of n_target
    bool include_half_adders = true;

    void validate() const;
};

struct PlanEntry {
    std::uint32_t adder = 0;
    Permutation permutation;  // absolute, relative to the identity wiring
};

struct PlanProvenance {
    std::int64_t path = 0;      // candidate path index in the untampered top-k; -1 for M-All
    std::size_t iteration = 0;  // greedy step on that path
    double predicted_gain = 0.0;
};

struct TamperPlan {
    std::vector<PlanEntry> entries;
    std::vector<PlanProvenance> provenance;
    std::string config_tag = "M-0-0";
    std::uint64_t netlist_hash = 0;
    std::vector<std::string> flags;

    bool contains(std::uint32_t adder) const;
    /// Entries sorted by adder id (for comparisons).
    std::vector<PlanEntry> sorted_entries() const;
};

void to_json(nlohmann::json& j, const TamperPlan& plan);
void from_json(const nlohmann::json& j, TamperPlan& plan);

/// Rewires an untampered netlist; rejects plans built for another netlist.
Netlist apply_plan(const Netlist& untampered, const TamperPlan& plan);

/// Changing an adder's permutation moves no adder output, so only its member
/// gates need new activity and delays. Keeps per-gate delays at one age.
class StressEvaluator {
public:
    StressEvaluator(const Netlist& netlist, const InputProfile& profile, const AgingParams& params,
                    double t_years);

    const Netlist& netlist() const { return netlist_; }
    const std::vector<double>& delays() const { return delays_; }
    const SignalActivity& activity() const { return activity_; }
    const Permutation& permutation(std::uint32_t adder) const { return netlist_.adder(adder).permutation; }

    /// Sets the adder's absolute permutation and refreshes its member gates.
    void set(std::uint32_t adder, const Permutation& absolute);

private:
    Netlist netlist_;
    SignalActivity activity_;
    AgingParams params_;
    double t_years_;
    std::vector<double> delays_;
};

/// "M-0-0", "M-<x>-<y>%", "M-All-<y>%", or "F-<y>%" (y% of all adders,
/// spent along the candidate paths in rank order).
struct ConfigTag {
    enum class Kind : std::uint8_t { None, Paths, All, AdderFraction };
    Kind kind = Kind::None;
    std::size_t paths = 0;
    double percent = 0.0;

    static ConfigTag parse(std::string_view text);
    std::string str() const;
};

struct GreedyCommit {
    std::uint32_t adder = 0;
    Permutation permutation;
    double gain = 0.0;
    double delay_after = 0.0;
};

struct PathTrace {
    std::size_t candidate = 0;
    PathDescriptor path;  // untampered gate sequence
    PathRoute route;
    std::size_t adder_count = 0;  // eligible adders on the route
    double base_delay = 0.0;
    double final_delay = 0.0;
    std::vector<GreedyCommit> commits;
    bool truncated = false;  // n_target exceeded the adders on the path
};

struct MAllCommit {
    std::uint32_t adder = 0;
    Permutation permutation;
    double gain = 0.0;
};

struct AttackOptions {
    std::size_t candidate_paths = 5;
    std::size_t n_target = std::numeric_limits<std::size_t>::max();
    bool include_half_adders = true;
    std::size_t threads = 0;
};

/// Runs the greedy rewiring once per candidate path and derives every
/// configuration from those traces, so M-1 plans nest inside M-2 plans etc.
class AttackPlanner {
public:
    AttackPlanner(const Netlist& untampered, const InputProfile& profile, const AgingParams& params,
                  double horizon_years = 4.0, AttackOptions options = {});

    const Netlist& netlist() const { return base_; }
    const InputProfile& profile() const { return profile_; }
    const AgingParams& params() const { return params_; }
    double horizon() const { return horizon_; }
    /// Traces in candidate order.
    const std::vector<PathTrace>& traces();
    /// Candidate indices sorted by final tampered delay (desc, then index).
    std::vector<std::size_t> ranking();
    const std::vector<MAllCommit>& mall_commits();
    /// Top-1 critical path of the untampered netlist at the horizon.
    const PathDescriptor& critical_path();

    TamperPlan plan(const ConfigTag& tag);
    TamperPlan plan(std::string_view tag) { return plan(ConfigTag::parse(tag)); }

private:
    void ensure_traces();
    void reset(StressEvaluator& eval, std::vector<std::uint32_t>& touched);
    bool eligible(std::uint32_t adder) const;

    Netlist base_;
    InputProfile profile_;
    AgingParams params_;
    double horizon_;
    AttackOptions options_;
    std::vector<PathDescriptor> candidates_;
    std::vector<PathTrace> traces_;
    bool traces_done_ = false;
    std::vector<MAllCommit> mall_;
    bool mall_done_ = false;
};

/// Per-path greedy rewiring over the top budget.k_paths paths; the plan is the union over
/// all of them in rank order.
TamperPlan run_algorithm1(const Netlist& untampered, const InputProfile& profile, const AttackBudget& budget,
                          double horizon_years, const AgingParams& params = {});

TamperPlan build_config(const Netlist& untampered, const InputProfile& profile, std::string_view tag,
                        double horizon_years = 4.0, const AgingParams& params = {});

enum class BaselineKind : std::uint8_t { PvTrojan, DccTrojan };

struct BaselineParams {
    double vth_boost_fraction = 0.10;
    double forced_alpha_high = 0.9;

    void validate() const;
};

std::string_view to_string(BaselineKind kind);
BaselineKind parse_baseline(std::string_view text);

/// Every PMOS site of every gate on the path.
std::vector<std::size_t> path_sites(const Netlist& netlist, const PathDescriptor& path);

/// PV_TROJAN: vth0 *= 1 + boost on the sites; DCC_TROJAN: alpha = forced high.
void apply_baseline(std::vector<TransistorState>& states, std::span<const std::size_t> sites, BaselineKind kind,
                    const BaselineParams& params = {});

struct AttackSeries {
    std::string tag;
    std::vector<ErrorReport> reports;  // one per grid age
};

/// Error-likelihood trajectories for M-x-y% tags and baseline names under one
/// shared guard band.
std::vector<AttackSeries> compare_attacks(AttackPlanner& planner, const std::vector<std::string>& attacks,
                                          const std::vector<double>& t_grid, const GuardBand& guard,
                                          const BaselineParams& baseline = {}, std::size_t threads = 0);

}  // namespace agewire
