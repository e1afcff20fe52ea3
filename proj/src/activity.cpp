#include "agewire/activity.hpp"

#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>

#include "agewire/rng.hpp"

namespace agewire {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error("activity", what); }

constexpr std::uint64_t kFull = ~std::uint64_t{0};

// Word pattern of input bit i (< 6) inside a 64-vector block.
constexpr std::uint64_t low_pattern(std::size_t i) {
    constexpr std::uint64_t patterns[6] = {0xaaaaaaaaaaaaaaaaULL, 0xccccccccccccccccULL, 0xf0f0f0f0f0f0f0f0ULL,
                                           0xff00ff00ff00ff00ULL, 0xffff0000ffff0000ULL, 0xffffffff00000000ULL};
    return patterns[i];
}

}  // namespace

InputProfile InputProfile::uniform(std::size_t n_inputs, double alpha) {
    InputProfile p;
    p.alpha_in.assign(n_inputs, alpha);
    return p;
}

InputProfile InputProfile::sampled(std::size_t n_inputs, std::size_t samples, std::uint64_t seed, double alpha) {
    InputProfile p;
    p.alpha_in.assign(n_inputs, alpha);
    p.mode = ProfileMode::Sampled;
    p.samples = samples;
    p.seed = seed;
    return p;
}

void InputProfile::validate(std::size_t n_inputs) const {
    if (alpha_in.size() != n_inputs)
        fail("input profile has " + std::to_string(alpha_in.size()) + " probabilities for " +
             std::to_string(n_inputs) + " primary inputs");
    for (double a : alpha_in)
        if (!(a >= 0.0 && a <= 1.0)) fail("input probability outside [0, 1]");
    if (mode == ProfileMode::Sampled && samples < 1) fail("SAMPLED profile needs at least one sample");
    if (mode == ProfileMode::Exhaustive && n_inputs > kMaxExhaustiveInputs)
        fail("EXHAUSTIVE stress limited to " + std::to_string(kMaxExhaustiveInputs) + " primary inputs, netlist has " +
             std::to_string(n_inputs));
}

SignalActivity::SignalActivity(const Netlist& netlist, const InputProfile& profile)
    : mode_(profile.mode), n_inputs_(netlist.input_count()) {
    profile.validate(n_inputs_);
    vectors_ = mode_ == ProfileMode::Exhaustive ? (std::size_t{1} << n_inputs_) : profile.samples;
    words_ = (vectors_ + 63) / 64;
    last_mask_ = vectors_ % 64 == 0 ? kFull : (std::uint64_t{1} << (vectors_ % 64)) - 1;
    bits_.assign(netlist.signal_count() * words_, 0);

    for (std::size_t i = 0; i < n_inputs_; ++i) {
        std::uint64_t* row = bits_.data() + i * words_;
        if (mode_ == ProfileMode::Exhaustive) {
            for (std::size_t w = 0; w < words_; ++w)
                row[w] = i < 6 ? low_pattern(i) : (((w >> (i - 6)) & 1U) ? kFull : 0);
        } else {
            for (std::size_t v = 0; v < vectors_; ++v) {
                bool zero = unit(key(profile.seed, v, i)) < profile.alpha_in[i];
                if (!zero) row[v / 64] |= std::uint64_t{1} << (v % 64);
            }
        }
        row[words_ - 1] &= last_mask_;
    }
    for (const auto& g : netlist.gates()) simulate_gate(g);
    set_weights(profile.alpha_in);
}

void SignalActivity::simulate_gate(const Gate& gate) {
    auto p = gate.pins();
    const std::uint64_t* a = bits_.data() + p[0].index * words_;
    const std::uint64_t* b = p.size() > 1 ? bits_.data() + p[1].index * words_ : nullptr;
    const std::uint64_t* c = p.size() > 2 ? bits_.data() + p[2].index * words_ : nullptr;
    std::uint64_t* out = bits_.data() + gate.output.index * words_;
    switch (gate.kind) {
        case GateKind::Inv:
            for (std::size_t w = 0; w < words_; ++w) out[w] = ~a[w];
            break;
        case GateKind::Nand2:
            for (std::size_t w = 0; w < words_; ++w) out[w] = ~(a[w] & b[w]);
            break;
        case GateKind::Nor2:
            for (std::size_t w = 0; w < words_; ++w) out[w] = ~(a[w] | b[w]);
            break;
        case GateKind::Xor2:
            for (std::size_t w = 0; w < words_; ++w) out[w] = a[w] ^ b[w];
            break;
        case GateKind::Maj3:
            for (std::size_t w = 0; w < words_; ++w) out[w] = (a[w] & b[w]) | (a[w] & c[w]) | (b[w] & c[w]);
            break;
    }
    out[words_ - 1] &= last_mask_;
}

void SignalActivity::set_weights(std::span<const double> alpha_in) {
    std::vector<double> lo(64, 0.0);
    if (mode_ == ProfileMode::Exhaustive) {
        const std::size_t low_bits = std::min<std::size_t>(n_inputs_, 6);
        for (std::size_t j = 0; j < (std::size_t{1} << low_bits); ++j) {
            double w = 1.0;
            for (std::size_t i = 0; i < low_bits; ++i) w *= ((j >> i) & 1U) ? 1.0 - alpha_in[i] : alpha_in[i];
            lo[j] = w;
        }
        hi_.assign(words_, 1.0);
        for (std::size_t w = 0; w < words_; ++w)
            for (std::size_t i = 6; i < n_inputs_; ++i) hi_[w] *= ((w >> (i - 6)) & 1U) ? 1.0 - alpha_in[i] : alpha_in[i];
    } else {
        for (auto& v : lo) v = 1.0 / static_cast<double>(vectors_);
        hi_.assign(words_, 1.0);
    }
    byte_lo_.assign(8 * 256, 0.0);
    for (std::size_t k = 0; k < 8; ++k)
        for (std::size_t b = 0; b < 256; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < 8; ++i)
                if ((b >> i) & 1U) s += lo[8 * k + i];
            byte_lo_[k * 256 + b] = s;
        }
    alpha_.assign(bits_.size() / words_, 0.0);
    for (std::size_t s = 0; s < alpha_.size(); ++s) alpha_[s] = zero_weight(SignalId{static_cast<std::uint32_t>(s)});
}

double SignalActivity::zero_weight(SignalId s) const {
    const std::uint64_t* row = bits_.data() + s.index * words_;
    double total = 0.0;
    for (std::size_t w = 0; w < words_; ++w) {
        std::uint64_t zeros = ~row[w] & (w + 1 == words_ ? last_mask_ : kFull);
        if (zeros == 0) continue;
        double part = 0.0;
        for (std::size_t k = 0; k < 8; ++k) part += byte_lo_[k * 256 + ((zeros >> (8 * k)) & 0xff)];
        total += part * hi_[w];
    }
    return std::clamp(total, 0.0, 1.0);
}

void SignalActivity::resimulate(const Netlist& netlist, std::span<const GateId> gates) {
    for (auto g : gates) simulate_gate(netlist.gate(g));
    for (auto g : gates) {
        SignalId out = netlist.gate(g).output;
        alpha_[out.index] = zero_weight(out);
    }
}

void SignalActivity::reweight(std::span<const double> alpha_in) {
    if (mode_ != ProfileMode::Exhaustive) fail("reweight requires an EXHAUSTIVE population");
    if (alpha_in.size() != n_inputs_) fail("reweight: probability count mismatch");
    set_weights(alpha_in);
}

StressMap SignalActivity::stress(const Netlist& netlist) const {
    StressMap map;
    map.alpha.resize(netlist.site_count());
    map.confidence.assign(netlist.site_count(), 0.0);
    for (std::size_t g = 0; g < netlist.gate_count(); ++g) {
        const Gate& gate = netlist.gates()[g];
        auto pins = gate.pins();
        for (std::size_t p = 0; p < pins.size(); ++p) {
            std::size_t site = netlist.site_index(GateId{static_cast<std::uint32_t>(g)}, p);
            double a = alpha_[pins[p].index];
            map.alpha[site] = a;
            if (mode_ == ProfileMode::Sampled)
                map.confidence[site] = 1.96 * std::sqrt(a * (1.0 - a) / static_cast<double>(vectors_));
        }
    }
    return map;
}

StressMap compute_stress(const Netlist& netlist, const InputProfile& profile) {
    return SignalActivity(netlist, profile).stress(netlist);
}

std::vector<std::size_t> stress_histogram(const StressMap& stress, std::size_t n_bins) {
    if (n_bins < 2) fail("histogram needs at least 2 bins");
    std::vector<std::size_t> counts(n_bins, 0);
    for (double a : stress.alpha) {
        auto bin = static_cast<std::size_t>(a * static_cast<double>(n_bins));
        ++counts[std::min(bin, n_bins - 1)];
    }
    return counts;
}

double stress_variance(const StressMap& stress) {
    if (stress.alpha.empty()) return 0.0;
    double mean = 0.0;
    for (double a : stress.alpha) mean += a;
    mean /= static_cast<double>(stress.alpha.size());
    double var = 0.0;
    for (double a : stress.alpha) var += (a - mean) * (a - mean);
    return var / static_cast<double>(stress.alpha.size());
}

void write_stress_csv(std::ostream& os, const Netlist& netlist, const StressMap& stress) {
    os << "gate_id,pin,alpha,confidence\n";
    os << std::setprecision(17);
    for (std::size_t i = 0; i < stress.alpha.size(); ++i) {
        TransistorSite site = netlist.site(i);
        os << site.gate.index << ',' << int{site.pin} << ',' << stress.alpha[i] << ',' << stress.confidence[i] << '\n';
    }
}

}  // namespace agewire
