#include "agewire/inference.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "agewire/parallel.hpp"

namespace agewire {

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error("inference", what); }

template <typename T>
void put(std::ostream& os, T v) {
    std::uint64_t bits = 0;
    if constexpr (std::is_floating_point_v<T>)
        bits = std::bit_cast<std::uint64_t>(static_cast<double>(v));
    else
        bits = static_cast<std::uint64_t>(v);
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    unsigned char buf[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(buf), sizeof(T))) fail("truncated fault table file");
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    if constexpr (std::is_floating_point_v<T>)
        return static_cast<T>(std::bit_cast<double>(bits));
    else
        return static_cast<T>(bits);
}

// round(value / 2^shift), ties to even.
std::uint64_t round_shift(std::uint64_t value, int shift) {
    if (shift <= 0) return value << -shift;
    const std::uint64_t q = value >> shift;
    const std::uint64_t rem = value & ((std::uint64_t{1} << shift) - 1);
    const std::uint64_t half = std::uint64_t{1} << (shift - 1);
    return (rem > half || (rem == half && (q & 1U))) ? q + 1 : q;
}

struct Aligned {
    bool sign = false;
    int exponent = 0;
    int shift = 0;
    bool zero = false;
};

Aligned align(const FpNumber& p, const FpNumber& q, const FpFormat& f) {
    Aligned a;
    a.sign = p.sign != q.sign;
    if (p.is_zero() || q.is_zero()) {
        a.zero = true;
        return a;
    }
    const std::uint64_t prod = static_cast<std::uint64_t>(p.significand(f)) * q.significand(f);
    const int top = (prod >> (2 * f.fraction_bits + 1)) ? 1 : 0;
    a.shift = f.fraction_bits + top;
    a.exponent = static_cast<int>(p.exponent) + static_cast<int>(q.exponent) - 127 + top;
    if (round_shift(prod, a.shift) >> (f.fraction_bits + 1)) a.exponent += 1;  // rounding carried out
    return a;
}

FpMultiply finish(const Aligned& a, std::uint32_t fraction, const FpFormat& f) {
    FpMultiply r;
    r.value.sign = a.sign;
    if (a.zero) return r;
    if (a.exponent >= 255) {
        r.overflow = true;
        r.value.exponent = 254;
        r.value.fraction = (1U << f.fraction_bits) - 1;
        return r;
    }
    if (a.exponent <= 0) {
        r.underflow = true;
        return r;
    }
    r.value.exponent = static_cast<std::uint32_t>(a.exponent);
    r.value.fraction = fraction;
    return r;
}

}  // namespace

// --- Floating point ------------------------------------------------------------

FpNumber encode(float value, const FpFormat& format) {
    if (!std::isfinite(value)) fail("cannot encode a non-finite value");
    if (format.fraction_bits < 1 || format.fraction_bits > 23) fail("fraction_bits must be in [1, 23]");
    const auto bits = std::bit_cast<std::uint32_t>(value);
    FpNumber n;
    n.sign = (bits >> 31) != 0;
    std::uint32_t e = (bits >> 23) & 0xffU;
    if (e == 0) return n;  // zero or subnormal
    const int shift = 23 - format.fraction_bits;
    auto frac = static_cast<std::uint32_t>(round_shift(bits & 0x7fffffU, shift));
    if (frac >> format.fraction_bits) {
        frac = 0;
        ++e;
    }
    if (e >= 255) {
        e = 254;
        frac = (1U << format.fraction_bits) - 1;
    }
    n.exponent = e;
    n.fraction = frac;
    return n;
}

float decode(const FpNumber& value, const FpFormat& format) {
    const std::uint32_t sign = value.sign ? 0x80000000U : 0U;
    if (value.is_zero()) return std::bit_cast<float>(sign);
    return std::bit_cast<float>(sign | (value.exponent << 23) | (value.fraction << (23 - format.fraction_bits)));
}

FpMultiply reference_multiply_fp(const FpNumber& p, const FpNumber& q, const FpFormat& format) {
    const Aligned a = align(p, q, format);
    if (a.zero) return finish(a, 0, format);
    const std::uint64_t prod = static_cast<std::uint64_t>(p.significand(format)) * q.significand(format);
    const std::uint64_t mask = (std::uint64_t{1} << format.fraction_bits) - 1;
    return finish(a, static_cast<std::uint32_t>(round_shift(prod, a.shift) & mask), format);
}

FpMultiply faulty_multiply_fp(const FpNumber& p, const FpNumber& q, const FpFormat& format, const FaultTable& table) {
    if (table.width() != format.significand_bits())
        fail("fault table width " + std::to_string(table.width()) + " does not match the " +
             std::to_string(format.significand_bits()) + "-bit significand");
    const Aligned a = align(p, q, format);
    if (a.zero) return finish(a, 0, format);
    const std::uint64_t prod = table.product(p.significand(format), q.significand(format));
    const std::uint64_t mask = (std::uint64_t{1} << format.fraction_bits) - 1;
    return finish(a, static_cast<std::uint32_t>(round_shift(prod, a.shift) & mask), format);
}

// --- Fault table -------------------------------------------------------------------

std::size_t FaultTable::faulty_count() const {
    const std::uint32_t mask = (1U << width_) - 1;
    std::size_t n = 0;
    for (std::size_t i = 0; i < index_.size(); ++i)
        if (product_[i] != (index_[i] & mask) * (index_[i] >> width_)) ++n;
    return n;
}

std::uint32_t FaultTable::product(std::uint32_t a, std::uint32_t b) const {
    const std::uint32_t idx = a | (b << width_);
    if (exhaustive_) return product_[idx];
    auto it = std::lower_bound(index_.begin(), index_.end(), idx);
    if (it != index_.end() && *it == idx) return product_[static_cast<std::size_t>(it - index_.begin())];
    return a * b;
}

void FaultTable::write(std::ostream& os) const {
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(width_));
    put<double>(os, t_years_);
    put<double>(os, p_d_);
    put<std::uint64_t>(os, netlist_hash_);
    put<std::uint8_t>(os, exhaustive_ ? 1 : 0);
    put<std::uint64_t>(os, index_.size());
    for (std::size_t i = 0; i < index_.size(); ++i) {
        put<std::uint32_t>(os, index_[i]);
        put<std::uint32_t>(os, product_[i]);
    }
}

FaultTable FaultTable::read(std::istream& is) {
    char magic[sizeof kMagic];
    if (!is.read(magic, sizeof magic) || !std::equal(magic, magic + sizeof magic, kMagic))
        fail("not a fault table file");
    FaultTable t;
    t.width_ = static_cast<int>(get<std::uint32_t>(is));
    if (t.width_ < 2 || t.width_ > 16) fail("fault table width out of range");
    t.t_years_ = get<double>(is);
    t.p_d_ = get<double>(is);
    t.netlist_hash_ = get<std::uint64_t>(is);
    t.exhaustive_ = get<std::uint8_t>(is) != 0;
    const auto n = get<std::uint64_t>(is);
    if (n > (std::uint64_t{1} << (2 * t.width_))) fail("fault table record count out of range");
    t.index_.resize(n);
    t.product_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        t.index_[i] = get<std::uint32_t>(is);
        t.product_[i] = get<std::uint32_t>(is);
        if (i > 0 && t.index_[i] <= t.index_[i - 1]) fail("fault table records not strictly sorted");
    }
    if (t.exhaustive_ && n != (std::uint64_t{1} << (2 * t.width_))) fail("exhaustive fault table is incomplete");
    return t;
}

FaultTable build_fault_table(const Netlist& netlist, std::span<const double> delays, double t_years,
                             const GuardBand& guard, const StimulusMode& coverage, std::size_t threads) {
    if (netlist.architecture() != guard.arch || netlist.width() != guard.width)
        fail("guard band was computed for a different architecture or width");
    if (coverage.kind == StimulusKind::RandomPairs) fail("fault tables use all-zeros -> pair transitions");
    coverage.validate(netlist);
    if (netlist.outputs().size() > 32) fail("fault tables hold at most 32 product bits");

    FaultTable t;
    t.width_ = netlist.width();
    t.t_years_ = t_years;
    t.p_d_ = guard.p_d;
    t.netlist_hash_ = netlist.content_hash();
    t.exhaustive_ = coverage.kind == StimulusKind::Exhaustive;
    const std::size_t n = coverage.size(netlist);
    t.index_.resize(n);
    for (std::size_t i = 0; i < n; ++i) t.index_[i] = static_cast<std::uint32_t>(coverage.at(netlist, i).second);
    if (!t.exhaustive_) {
        std::sort(t.index_.begin(), t.index_.end());
        t.index_.erase(std::unique(t.index_.begin(), t.index_.end()), t.index_.end());
    }
    t.product_.resize(t.index_.size());
    parallel_blocks(
        t.index_.size(),
        [&](std::size_t begin, std::size_t end) {
            TransitionSimulator sim(netlist, delays);
            for (std::size_t i = begin; i < end; ++i) {
                std::uint64_t latched = 0;
                sim.settle_time(0, t.index_[i], guard.p_d, latched);
                t.product_[i] = static_cast<std::uint32_t>(latched);
            }
        },
        threads);
    return t;
}

// --- Toy model -----------------------------------------------------------------------

ToyModel load_toy_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open model file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail("model file " + path + " is not valid JSON: " + e.what());
    }
    ToyModel m;
    m.name = j.value("name", std::string("model"));
    std::size_t prev_out = 0;
    for (const auto& l : j.at("layers")) {
        DenseLayer layer;
        layer.in = l.at("in").get<std::size_t>();
        layer.out = l.at("out").get<std::size_t>();
        layer.relu = l.at("relu").get<bool>();
        layer.weights = l.at("weights").get<std::vector<float>>();
        layer.bias = l.at("bias").get<std::vector<float>>();
        if (layer.weights.size() != layer.in * layer.out || layer.bias.size() != layer.out)
            fail("layer shape mismatch in " + path);
        if (prev_out && prev_out != layer.in) fail("consecutive layers do not chain in " + path);
        prev_out = layer.out;
        m.layers.push_back(std::move(layer));
    }
    if (m.layers.empty()) fail("model has no layers");
    m.test_features = j.at("test").at("features").get<std::vector<std::vector<float>>>();
    m.test_labels = j.at("test").at("labels").get<std::vector<int>>();
    if (m.test_features.size() != m.test_labels.size()) fail("test features/labels size mismatch");
    for (const auto& x : m.test_features)
        if (x.size() != m.layers.front().in) fail("test sample width mismatch");
    return m;
}

double evaluate_accuracy(const ToyModel& model, const FpFormat& format, const FaultTable* table,
                         std::size_t threads) {
    std::vector<std::vector<FpNumber>> weights;
    for (const auto& l : model.layers) {
        std::vector<FpNumber> w(l.weights.size());
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = encode(l.weights[i], format);
        weights.push_back(std::move(w));
    }
    std::vector<std::uint8_t> correct(model.test_features.size(), 0);
    parallel_blocks(
        correct.size(),
        [&](std::size_t begin, std::size_t end) {
            std::vector<float> act, next;
            std::vector<FpNumber> x;
            for (std::size_t s = begin; s < end; ++s) {
                act = model.test_features[s];
                for (std::size_t li = 0; li < model.layers.size(); ++li) {
                    const DenseLayer& l = model.layers[li];
                    x.resize(act.size());
                    for (std::size_t i = 0; i < act.size(); ++i) x[i] = encode(act[i], format);
                    next.assign(l.out, 0.0f);
                    for (std::size_t o = 0; o < l.out; ++o) {
                        float acc = 0.0f;
                        for (std::size_t i = 0; i < l.in; ++i) {
                            const FpNumber& w = weights[li][o * l.in + i];
                            FpMultiply m = table ? faulty_multiply_fp(w, x[i], format, *table)
                                                 : reference_multiply_fp(w, x[i], format);
                            acc += decode(m.value, format);
                        }
                        acc += l.bias[o];
                        next[o] = l.relu ? std::max(acc, 0.0f) : acc;
                    }
                    act.swap(next);
                }
                const auto best = static_cast<int>(std::max_element(act.begin(), act.end()) - act.begin());
                correct[s] = best == model.test_labels[s] ? 1 : 0;
            }
        },
        threads);
    const auto hits = std::count(correct.begin(), correct.end(), 1);
    return correct.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(correct.size());
}

std::vector<AccuracyPoint> run_inference(const ToyModel& model, const FpFormat& format,
                                         const std::vector<FaultTable>& tables, std::size_t threads) {
    std::vector<AccuracyPoint> out;
    for (const auto& t : tables)
        out.push_back({t.t_years(), evaluate_accuracy(model, format, &t, threads), t.faulty_count()});
    return out;
}

}  // namespace agewire
