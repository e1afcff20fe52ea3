#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "agewire/circuit.hpp"
#include "agewire/timing.hpp"

namespace agewire {

/// Sign / 8-bit biased exponent / `fraction_bits` fraction with an implicit
/// leading one. Subnormals flush to zero.
struct FpFormat {
    int fraction_bits = 7;

    static FpFormat float32() { return {23}; }
    static FpFormat reduced8() { return {7}; }
    int significand_bits() const { return fraction_bits + 1; }
};

struct FpNumber {
    bool sign = false;
    std::uint32_t exponent = 0;  // biased; 0 = zero
    std::uint32_t fraction = 0;

    bool is_zero() const { return exponent == 0; }
    std::uint32_t significand(const FpFormat& f) const { return is_zero() ? 0 : fraction | (1U << f.fraction_bits); }
    bool operator==(const FpNumber&) const = default;
};

/// Round-to-nearest-even into the format; rejects non-finite values.
FpNumber encode(float value, const FpFormat& format);
float decode(const FpNumber& value, const FpFormat& format);

/// Faulty multiplier outputs latched at the guard band: product[a | b << w].
class FaultTable {
public:
    static constexpr char kMagic[8] = {'A', 'G', 'W', 'F', 'T', 'B', 'L', '1'};

    int width() const { return width_; }
    double t_years() const { return t_years_; }
    double p_d() const { return p_d_; }
    std::uint64_t netlist_hash() const { return netlist_hash_; }
    bool exhaustive() const { return exhaustive_; }
    std::size_t record_count() const { return index_.size(); }
    /// Entries whose latched product differs from the true product.
    std::size_t faulty_count() const;
    /// Latched product; pairs outside a sampled table are assumed correct.
    std::uint32_t product(std::uint32_t a, std::uint32_t b) const;

    void write(std::ostream& os) const;
    static FaultTable read(std::istream& is);

    friend FaultTable build_fault_table(const Netlist&, std::span<const double>, double, const GuardBand&,
                                        const StimulusMode&, std::size_t);

private:
    int width_ = 0;
    double t_years_ = 0.0;
    double p_d_ = 0.0;
    std::uint64_t netlist_hash_ = 0;
    bool exhaustive_ = true;
    std::vector<std::uint32_t> index_;    // sorted operand-pair indices
    std::vector<std::uint32_t> product_;  // latched product per record
};

/// Runs the all-zeros -> (a, b) transition for each operand pair and latches
/// every output at guard.p_d. `coverage` is EXHAUSTIVE (width <= 8) or
/// RANDOM_VECTORS.
FaultTable build_fault_table(const Netlist& netlist, std::span<const double> delays, double t_years,
                             const GuardBand& guard, const StimulusMode& coverage = StimulusMode::exhaustive(),
                             std::size_t threads = 0);

struct FpMultiply {
    FpNumber value;
    bool overflow = false;
    bool underflow = false;
};

/// Exact significand product, renormalized and rounded into the format.
FpMultiply reference_multiply_fp(const FpNumber& p, const FpNumber& q, const FpFormat& format);
/// As the reference, but the significand product comes from the table; sign
/// and exponent are the reference's, only fraction bits can differ.
FpMultiply faulty_multiply_fp(const FpNumber& p, const FpNumber& q, const FpFormat& format, const FaultTable& table);

struct DenseLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    bool relu = false;
    std::vector<float> weights;  // row-major [out][in]
    std::vector<float> bias;
};

struct ToyModel {
    std::string name;
    std::vector<DenseLayer> layers;
    std::vector<std::vector<float>> test_features;
    std::vector<int> test_labels;
};

ToyModel load_toy_model(const std::string& path);

/// Top-1 accuracy with every product routed through the reduced-format
/// multiplier (faulty when a table is given); accumulation in float32.
double evaluate_accuracy(const ToyModel& model, const FpFormat& format, const FaultTable* table,
                         std::size_t threads = 0);

struct AccuracyPoint {
    double t_years = 0.0;
    double accuracy = 0.0;
    std::size_t faulty_entries = 0;
};

std::vector<AccuracyPoint> run_inference(const ToyModel& model, const FpFormat& format,
                                         const std::vector<FaultTable>& tables, std::size_t threads = 0);

}  // namespace agewire
