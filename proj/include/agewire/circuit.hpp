#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace agewire {

/// Failure raised by any module; `module()` names the origin so the CLI can
/// report it as machine-readable JSON.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

struct SignalId {
    std::uint32_t index = 0;
    auto operator<=>(const SignalId&) const = default;
};

struct GateId {
    std::uint32_t index = 0;
    auto operator<=>(const GateId&) const = default;
};

enum class GateKind : std::uint8_t { Inv, Nand2, Nor2, Xor2, Maj3 };
inline constexpr std::size_t kGateKindCount = 5;

std::size_t arity(GateKind kind);
std::string_view to_string(GateKind kind);
GateKind parse_gate_kind(std::string_view text);
bool eval_gate(GateKind kind, bool a, bool b, bool c);

struct Gate {
    GateKind kind = GateKind::Inv;
    std::array<SignalId, 3> inputs{};
    SignalId output{};

    std::span<const SignalId> pins() const { return {inputs.data(), arity(kind)}; }
};

/// One PMOS per gate input pin. Its gate terminal sees exactly the pin signal.
struct TransistorSite {
    GateId gate;
    std::uint8_t pin = 0;
};

/// Ordering over an adder's input positions: slot s is fed by the signal that
/// currently sits at position `map[s]`.
class Permutation {
public:
    Permutation() = default;
    static Permutation identity(std::size_t n);
    static Permutation from(std::span<const std::uint8_t> map);
    /// All permutations of n elements in lexicographic order (identity first).
    static std::vector<Permutation> all(std::size_t n);

    std::size_t size() const { return size_; }
    std::uint8_t operator[](std::size_t i) const { return map_[i]; }
    bool is_identity() const;
    Permutation inverse() const;
    /// (this then other): slot s takes what `this` placed at other[s].
    Permutation then(const Permutation& other) const;
    std::string str() const;
    static Permutation parse(std::string_view text);

    auto operator<=>(const Permutation&) const = default;

private:
    std::array<std::uint8_t, 3> map_{0, 1, 2};
    std::uint8_t size_ = 0;
};

enum class AdderKind : std::uint8_t { Half, Full };
enum class Architecture : std::uint8_t { Array, Wallace, Custom };

std::string_view to_string(AdderKind kind);
std::string_view to_string(Architecture arch);
Architecture parse_architecture(std::string_view text);

/// A gate pin that is wired to one of the adder's logical input slots.
struct SlotPin {
    GateId gate;
    std::uint8_t pin = 0;
    std::uint8_t slot = 0;
};

struct AdderInstance {
    std::uint32_t id = 0;
    AdderKind kind = AdderKind::Full;
    std::vector<SignalId> inputs;  // construction order (a, b[, c])
    std::vector<GateId> members;   // topological order
    std::vector<SlotPin> slot_pins;
    Permutation permutation;
    SignalId sum;
    SignalId carry;
};

/// Immutable gate graph. Signal ids [0, n_inputs) are primary inputs; gate i
/// drives signal n_inputs + i, so gate order is a topological order.
class Netlist {
public:
    std::size_t input_count() const { return n_inputs_; }
    std::size_t signal_count() const { return n_inputs_ + gates_.size(); }
    std::size_t gate_count() const { return gates_.size(); }
    std::size_t site_count() const { return site_offset_.empty() ? 0 : site_offset_.back(); }

    const std::vector<Gate>& gates() const { return gates_; }
    const Gate& gate(GateId g) const { return gates_[g.index]; }
    const std::vector<SignalId>& outputs() const { return outputs_; }
    const std::vector<AdderInstance>& adders() const { return adders_; }
    const AdderInstance& adder(std::uint32_t id) const;
    Architecture architecture() const { return arch_; }
    int width() const { return width_; }

    bool is_input(SignalId s) const { return s.index < n_inputs_; }
    GateId driver(SignalId s) const { return GateId{s.index - static_cast<std::uint32_t>(n_inputs_)}; }

    std::size_t site_index(GateId g, std::size_t pin) const { return site_offset_[g.index] + pin; }
    std::size_t first_site(GateId g) const { return site_offset_[g.index]; }
    TransistorSite site(std::size_t index) const;

    /// Adder owning the gate, or -1.
    std::int32_t adder_of(GateId g) const { return gate_adder_[g.index]; }
    /// Gate ids reading each signal.
    const std::vector<std::vector<GateId>>& fanout() const { return fanout_; }
    std::vector<bool> output_mask() const;

    /// Maximum number of gates on any input-to-output path.
    std::size_t depth() const;
    /// Every adder at identity permutation.
    bool untampered() const;

    /// Deterministic text form (see write_netlist).
    std::string to_text() const;
    /// FNV-1a 64 over the text form.
    std::uint64_t content_hash() const;

private:
    friend class NetlistBuilder;
    friend Netlist apply_permutation(const Netlist&, std::uint32_t, const Permutation&);
    friend void rewire(Netlist&, std::uint32_t, const Permutation&);
    friend Netlist read_netlist(std::istream&);
    void finalize();

    std::size_t n_inputs_ = 0;
    std::vector<Gate> gates_;
    std::vector<SignalId> outputs_;
    std::vector<AdderInstance> adders_;
    Architecture arch_ = Architecture::Custom;
    int width_ = 0;

    std::vector<std::size_t> site_offset_;
    std::vector<std::int32_t> gate_adder_;
    std::vector<std::vector<GateId>> fanout_;
};

struct AdderOutputs {
    SignalId sum;
    SignalId carry;
    std::uint32_t adder_id = 0;
};

class NetlistBuilder {
public:
    explicit NetlistBuilder(std::size_t n_inputs);

    SignalId input(std::size_t i) const;
    SignalId add_gate(GateKind kind, std::span<const SignalId> inputs);
    SignalId add_gate(GateKind kind, std::initializer_list<SignalId> inputs) {
        return add_gate(kind, std::span<const SignalId>(inputs.begin(), inputs.size()));
    }
    /// x1=XOR2(a,b) x2=XOR2(b,c) eq=NOR2(x1,x2) cout=MAJ3(a,b,c) t=XOR2(eq,cout) sum=INV(t)
    AdderOutputs full_adder(SignalId a, SignalId b, SignalId c);
    /// sum=XOR2(a,b) n=NAND2(a,b) cout=INV(n)
    AdderOutputs half_adder(SignalId a, SignalId b);
    void add_output(SignalId s);

    Netlist finish(Architecture arch = Architecture::Custom, int width = 0) &&;

private:
    void check_driven(SignalId s) const;
    Netlist net_;
};

Netlist build_full_adder_netlist();
Netlist build_half_adder_netlist();
/// Row-ripple array: each partial-product row is added with a ripple chain.
Netlist build_array_multiplier(int width);
/// Wallace reduction (FA per 3 bits, HA per leftover pair) + ripple final adder.
Netlist build_wallace_multiplier(int width);
Netlist build_multiplier(Architecture arch, int width);

std::vector<bool> evaluate(const Netlist& netlist, const std::vector<bool>& input_bits);
/// Packs operands as input bits [a0..a(w-1), b0..b(w-1)] and reads the product.
std::uint64_t multiply(const Netlist& netlist, std::uint64_t a, std::uint64_t b);
std::vector<bool> input_bits(std::uint64_t packed, std::size_t n);

/// Rewires the adder's slot pins by composing `perm` onto its current ordering.
Netlist apply_permutation(const Netlist& netlist, std::uint32_t adder_id, const Permutation& perm);
/// In place: sets the adder's permutation to `absolute` (relative to identity).
void rewire(Netlist& netlist, std::uint32_t adder_id, const Permutation& absolute);

void write_netlist(std::ostream& os, const Netlist& netlist);
Netlist read_netlist(std::istream& is);

}  // namespace agewire
