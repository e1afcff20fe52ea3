#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "agewire/circuit.hpp"

namespace agewire {

enum class ProfileMode : std::uint8_t { Exhaustive, Sampled };

inline constexpr std::size_t kMaxExhaustiveInputs = 20;

/// Statistics of the primary inputs: alpha_in[i] = P(input i == 0).
struct InputProfile {
    std::vector<double> alpha_in;
    ProfileMode mode = ProfileMode::Exhaustive;
    std::size_t samples = 0;
    std::uint64_t seed = 0;

    static InputProfile uniform(std::size_t n_inputs, double alpha = 0.5);
    static InputProfile sampled(std::size_t n_inputs, std::size_t samples, std::uint64_t seed, double alpha = 0.5);
    void validate(std::size_t n_inputs) const;
};

/// Per-site stress probability alpha = P(pin == 0) and 95% half-width.
struct StressMap {
    std::vector<double> alpha;
    std::vector<double> confidence;
};

/// Bit-parallel simulation of the netlist over a weighted population of input
/// vectors (all 2^N for EXHAUSTIVE, seeded draws for SAMPLED). Bit v of a
/// signal's word array is its value under vector v.
class SignalActivity {
public:
    SignalActivity(const Netlist& netlist, const InputProfile& profile);

    /// Re-simulates only `gates` (topological order) after their pins were
    /// rewired. Valid when the gates' outputs outside the set are unchanged,
    /// which holds for adder permutations.
    void resimulate(const Netlist& netlist, std::span<const GateId> gates);

    /// New input probabilities over the same vector population (EXHAUSTIVE only).
    void reweight(std::span<const double> alpha_in);

    double alpha(SignalId s) const { return alpha_[s.index]; }
    const std::vector<double>& signal_alpha() const { return alpha_; }
    StressMap stress(const Netlist& netlist) const;

    std::size_t vector_count() const { return vectors_; }
    std::size_t word_count() const { return words_; }
    std::span<const std::uint64_t> bits(SignalId s) const { return {bits_.data() + s.index * words_, words_}; }
    ProfileMode mode() const { return mode_; }

private:
    void simulate_gate(const Gate& gate);
    double zero_weight(SignalId s) const;
    void set_weights(std::span<const double> alpha_in);

    ProfileMode mode_;
    std::size_t n_inputs_;
    std::size_t vectors_;
    std::size_t words_;
    std::uint64_t last_mask_;
    std::vector<std::uint64_t> bits_;
    std::vector<double> alpha_;
    // weight(v) = lo[v & 63] * hi[v >> 6]; byte_lo[k][b] sums lo over set bits of byte k.
    std::vector<double> hi_;
    std::vector<double> byte_lo_;
};

StressMap compute_stress(const Netlist& netlist, const InputProfile& profile);

/// Counts over n_bins equal-width bins of [0, 1]; alpha == 1 lands in the last bin.
std::vector<std::size_t> stress_histogram(const StressMap& stress, std::size_t n_bins);
double stress_variance(const StressMap& stress);

/// CSV `gate_id,pin,alpha,confidence`.
void write_stress_csv(std::ostream& os, const Netlist& netlist, const StressMap& stress);

}  // namespace agewire
