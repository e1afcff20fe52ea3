#include "agewire/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "agewire/hash.hpp"

namespace agewire {

namespace {

constexpr std::array<std::string_view, kGateKindCount> kKindNames = {"INV", "NAND2", "NOR2", "XOR2",
                                                                     "MAJ3"};

[[noreturn]] void fail(const std::string& what) { throw Error("circuit", what); }

}  // namespace

std::size_t arity(GateKind kind) {
    switch (kind) {
        case GateKind::Inv: return 1;
        case GateKind::Maj3: return 3;
        default: return 2;
    }
}

std::string_view to_string(GateKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

GateKind parse_gate_kind(std::string_view text) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i)
        if (kKindNames[i] == text) return static_cast<GateKind>(i);
    fail("unknown gate kind '" + std::string(text) + "'");
}

bool eval_gate(GateKind kind, bool a, bool b, bool c) {
    switch (kind) {
        case GateKind::Inv: return !a;
        case GateKind::Nand2: return !(a && b);
        case GateKind::Nor2: return !(a || b);
        case GateKind::Xor2: return a != b;
        case GateKind::Maj3: return (a && b) || (a && c) || (b && c);
    }
    return false;
}

// --- Permutation -----------------------------------------------------------

Permutation Permutation::identity(std::size_t n) {
    if (n < 1 || n > 3) fail("permutation size must be 1..3");
    Permutation p;
    p.size_ = static_cast<std::uint8_t>(n);
    return p;
}

Permutation Permutation::from(std::span<const std::uint8_t> map) {
    if (map.empty() || map.size() > 3) fail("permutation size must be 1..3");
    Permutation p;
    p.size_ = static_cast<std::uint8_t>(map.size());
    std::array<bool, 3> seen{};
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map[i] >= map.size() || seen[map[i]]) fail("invalid permutation");
        seen[map[i]] = true;
        p.map_[i] = map[i];
    }
    return p;
}

std::vector<Permutation> Permutation::all(std::size_t n) {
    std::vector<std::uint8_t> map(n);
    std::iota(map.begin(), map.end(), std::uint8_t{0});
    std::vector<Permutation> out;
    do {
        out.push_back(from(map));
    } while (std::next_permutation(map.begin(), map.end()));
    return out;
}

bool Permutation::is_identity() const {
    for (std::size_t i = 0; i < size_; ++i)
        if (map_[i] != i) return false;
    return true;
}

Permutation Permutation::inverse() const {
    Permutation p = *this;
    for (std::size_t i = 0; i < size_; ++i) p.map_[map_[i]] = static_cast<std::uint8_t>(i);
    return p;
}

Permutation Permutation::then(const Permutation& other) const {
    if (other.size_ != size_) fail("permutation size mismatch");
    Permutation p = *this;
    for (std::size_t i = 0; i < size_; ++i) p.map_[i] = map_[other.map_[i]];
    return p;
}

std::string Permutation::str() const {
    std::string s;
    for (std::size_t i = 0; i < size_; ++i) s.push_back(static_cast<char>('0' + map_[i]));
    return s;
}

Permutation Permutation::parse(std::string_view text) {
    std::vector<std::uint8_t> map;
    for (char c : text) {
        if (c < '0' || c > '2') fail("invalid permutation '" + std::string(text) + "'");
        map.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return from(map);
}

std::string_view to_string(AdderKind kind) { return kind == AdderKind::Full ? "FULL" : "HALF"; }

std::string_view to_string(Architecture arch) {
    switch (arch) {
        case Architecture::Array: return "ARRAY";
        case Architecture::Wallace: return "WALLACE";
        case Architecture::Custom: return "CUSTOM";
    }
    return "CUSTOM";
}

Architecture parse_architecture(std::string_view text) {
    std::string up(text);
    std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
    if (up == "ARRAY") return Architecture::Array;
    if (up == "WALLACE") return Architecture::Wallace;
    if (up == "CUSTOM") return Architecture::Custom;
    fail("unknown architecture '" + std::string(text) + "'");
}

// --- Netlist ---------------------------------------------------------------

const AdderInstance& Netlist::adder(std::uint32_t id) const {
    if (id >= adders_.size()) fail("unknown adder " + std::to_string(id));
    return adders_[id];
}

TransistorSite Netlist::site(std::size_t index) const {
    auto it = std::upper_bound(site_offset_.begin(), site_offset_.end(), index);
    auto g = static_cast<std::uint32_t>(std::distance(site_offset_.begin(), it) - 1);
    return {GateId{g}, static_cast<std::uint8_t>(index - site_offset_[g])};
}

std::vector<bool> Netlist::output_mask() const {
    std::vector<bool> mask(signal_count(), false);
    for (auto s : outputs_) mask[s.index] = true;
    return mask;
}

std::size_t Netlist::depth() const {
    std::vector<std::size_t> level(signal_count(), 0);
    std::size_t best = 0;
    for (std::size_t g = 0; g < gates_.size(); ++g) {
        std::size_t l = 0;
        for (auto s : gates_[g].pins()) l = std::max(l, level[s.index]);
        level[gates_[g].output.index] = l + 1;
    }
    for (auto s : outputs_) best = std::max(best, level[s.index]);
    return best;
}

bool Netlist::untampered() const {
    return std::all_of(adders_.begin(), adders_.end(),
                       [](const AdderInstance& a) { return a.permutation.is_identity(); });
}

void Netlist::finalize() {
    site_offset_.assign(gates_.size() + 1, 0);
    for (std::size_t g = 0; g < gates_.size(); ++g)
        site_offset_[g + 1] = site_offset_[g] + arity(gates_[g].kind);
    gate_adder_.assign(gates_.size(), -1);
    for (const auto& a : adders_)
        for (auto g : a.members) {
            if (gate_adder_[g.index] != -1) fail("gate owned by two adders");
            gate_adder_[g.index] = static_cast<std::int32_t>(a.id);
        }
    fanout_.assign(signal_count(), {});
    for (std::size_t g = 0; g < gates_.size(); ++g)
        for (auto s : gates_[g].pins()) fanout_[s.index].push_back(GateId{static_cast<std::uint32_t>(g)});
}

std::string Netlist::to_text() const {
    std::ostringstream os;
    write_netlist(os, *this);
    return os.str();
}

std::uint64_t Netlist::content_hash() const { return fnv1a64(to_text()); }

// --- Builder ---------------------------------------------------------------

NetlistBuilder::NetlistBuilder(std::size_t n_inputs) {
    if (n_inputs == 0) fail("netlist needs at least one primary input");
    net_.n_inputs_ = n_inputs;
}

SignalId NetlistBuilder::input(std::size_t i) const {
    if (i >= net_.n_inputs_) fail("primary input out of range");
    return SignalId{static_cast<std::uint32_t>(i)};
}

void NetlistBuilder::check_driven(SignalId s) const {
    if (s.index >= net_.signal_count()) fail("undriven signal " + std::to_string(s.index));
}

SignalId NetlistBuilder::add_gate(GateKind kind, std::span<const SignalId> inputs) {
    if (inputs.size() != arity(kind))
        fail("gate " + std::string(to_string(kind)) + " expects " + std::to_string(arity(kind)) + " inputs");
    Gate gate;
    gate.kind = kind;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        check_driven(inputs[i]);
        gate.inputs[i] = inputs[i];
    }
    gate.output = SignalId{static_cast<std::uint32_t>(net_.signal_count())};
    net_.gates_.push_back(gate);
    return gate.output;
}

AdderOutputs NetlistBuilder::full_adder(SignalId a, SignalId b, SignalId c) {
    for (auto s : {a, b, c}) check_driven(s);
    if (a == b || a == c || b == c) fail("full adder inputs must be distinct signals");
    AdderInstance adder;
    adder.id = static_cast<std::uint32_t>(net_.adders_.size());
    adder.kind = AdderKind::Full;
    adder.inputs = {a, b, c};
    adder.permutation = Permutation::identity(3);

    auto next_gate = [&] { return GateId{static_cast<std::uint32_t>(net_.gates_.size())}; };
    GateId g_x1 = next_gate();
    SignalId x1 = add_gate(GateKind::Xor2, {a, b});
    GateId g_x2 = next_gate();
    SignalId x2 = add_gate(GateKind::Xor2, {b, c});
    GateId g_eq = next_gate();
    SignalId eq = add_gate(GateKind::Nor2, {x1, x2});
    GateId g_maj = next_gate();
    SignalId cout = add_gate(GateKind::Maj3, {a, b, c});
    GateId g_t = next_gate();
    SignalId t = add_gate(GateKind::Xor2, {eq, cout});
    GateId g_sum = next_gate();
    SignalId sum = add_gate(GateKind::Inv, {t});

    adder.members = {g_x1, g_x2, g_eq, g_maj, g_t, g_sum};
    adder.slot_pins = {{g_x1, 0, 0}, {g_x1, 1, 1}, {g_x2, 0, 1}, {g_x2, 1, 2},
                       {g_maj, 0, 0}, {g_maj, 1, 1}, {g_maj, 2, 2}};
    adder.sum = sum;
    adder.carry = cout;
    net_.adders_.push_back(std::move(adder));
    return {sum, cout, net_.adders_.back().id};
}

AdderOutputs NetlistBuilder::half_adder(SignalId a, SignalId b) {
    for (auto s : {a, b}) check_driven(s);
    if (a == b) fail("half adder inputs must be distinct signals");
    AdderInstance adder;
    adder.id = static_cast<std::uint32_t>(net_.adders_.size());
    adder.kind = AdderKind::Half;
    adder.inputs = {a, b};
    adder.permutation = Permutation::identity(2);

    GateId g_x{static_cast<std::uint32_t>(net_.gates_.size())};
    SignalId sum = add_gate(GateKind::Xor2, {a, b});
    GateId g_n{static_cast<std::uint32_t>(net_.gates_.size())};
    SignalId n = add_gate(GateKind::Nand2, {a, b});
    GateId g_c{static_cast<std::uint32_t>(net_.gates_.size())};
    SignalId cout = add_gate(GateKind::Inv, {n});

    adder.members = {g_x, g_n, g_c};
    adder.slot_pins = {{g_x, 0, 0}, {g_x, 1, 1}, {g_n, 0, 0}, {g_n, 1, 1}};
    adder.sum = sum;
    adder.carry = cout;
    net_.adders_.push_back(std::move(adder));
    return {sum, cout, net_.adders_.back().id};
}

void NetlistBuilder::add_output(SignalId s) {
    check_driven(s);
    net_.outputs_.push_back(s);
}

Netlist NetlistBuilder::finish(Architecture arch, int width) && {
    net_.arch_ = arch;
    net_.width_ = width;
    net_.finalize();
    return std::move(net_);
}

Netlist build_full_adder_netlist() {
    NetlistBuilder b(3);
    auto fa = b.full_adder(b.input(0), b.input(1), b.input(2));
    b.add_output(fa.sum);
    b.add_output(fa.carry);
    return std::move(b).finish();
}

Netlist build_half_adder_netlist() {
    NetlistBuilder b(2);
    auto ha = b.half_adder(b.input(0), b.input(1));
    b.add_output(ha.sum);
    b.add_output(ha.carry);
    return std::move(b).finish();
}

namespace {

void check_width(int width) {
    if (width < 2 || width > 16) fail("multiplier width must be in [2, 16], got " + std::to_string(width));
}

// pp[i][j] = a_j AND b_i
std::vector<std::vector<SignalId>> partial_products(NetlistBuilder& b, int n) {
    std::vector<std::vector<SignalId>> pp(n, std::vector<SignalId>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            SignalId nand = b.add_gate(GateKind::Nand2, {b.input(j), b.input(n + i)});
            pp[i][j] = b.add_gate(GateKind::Inv, {nand});
        }
    return pp;
}

}  // namespace

Netlist build_array_multiplier(int width) {
    check_width(width);
    const int n = width;
    NetlistBuilder b(2 * n);
    auto pp = partial_products(b, n);

    std::vector<SignalId> product(2 * n);
    product[0] = pp[0][0];
    std::vector<SignalId> acc(pp[0].begin() + 1, pp[0].end());
    for (int i = 1; i < n; ++i) {
        std::vector<SignalId> next(n);
        auto ha = b.half_adder(pp[i][0], acc[0]);
        product[i] = ha.sum;
        SignalId carry = ha.carry;
        for (int j = 1; j < n; ++j) {
            AdderOutputs out = j < static_cast<int>(acc.size()) ? b.full_adder(pp[i][j], acc[j], carry)
                                                                 : b.half_adder(pp[i][j], carry);
            next[j - 1] = out.sum;
            carry = out.carry;
        }
        next[n - 1] = carry;
        acc = std::move(next);
    }
    for (int j = 0; j < n; ++j) product[n + j] = acc[j];
    for (auto s : product) b.add_output(s);
    return std::move(b).finish(Architecture::Array, width);
}

Netlist build_wallace_multiplier(int width) {
    check_width(width);
    const int n = width;
    NetlistBuilder b(2 * n);
    auto pp = partial_products(b, n);

    std::vector<std::vector<SignalId>> columns(2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) columns[i + j].push_back(pp[i][j]);

    auto max_height = [&] {
        std::size_t h = 0;
        for (const auto& c : columns) h = std::max(h, c.size());
        return h;
    };
    while (max_height() > 2) {
        std::vector<std::vector<SignalId>> next(2 * n);
        for (int k = 0; k < 2 * n; ++k) {
            const auto& col = columns[k];
            std::size_t i = 0;
            for (; i + 3 <= col.size(); i += 3) {
                auto fa = b.full_adder(col[i], col[i + 1], col[i + 2]);
                next[k].push_back(fa.sum);
                if (k + 1 < 2 * n) next[k + 1].push_back(fa.carry);
            }
            if (col.size() - i == 2) {
                auto ha = b.half_adder(col[i], col[i + 1]);
                next[k].push_back(ha.sum);
                if (k + 1 < 2 * n) next[k + 1].push_back(ha.carry);
            } else if (col.size() - i == 1) {
                next[k].push_back(col[i]);
            }
        }
        columns = std::move(next);
    }

    std::vector<SignalId> product(2 * n);
    std::optional<SignalId> carry;
    for (int k = 0; k < 2 * n; ++k) {
        std::vector<SignalId> bits = columns[k];
        if (carry) bits.push_back(*carry);
        carry.reset();
        if (bits.empty()) fail("wallace column " + std::to_string(k) + " is empty");
        if (bits.size() == 1) {
            product[k] = bits[0];
        } else if (bits.size() == 2) {
            auto ha = b.half_adder(bits[0], bits[1]);
            product[k] = ha.sum;
            carry = ha.carry;
        } else {
            auto fa = b.full_adder(bits[0], bits[1], bits[2]);
            product[k] = fa.sum;
            carry = fa.carry;
        }
    }
    for (auto s : product) b.add_output(s);
    return std::move(b).finish(Architecture::Wallace, width);
}

Netlist build_multiplier(Architecture arch, int width) {
    switch (arch) {
        case Architecture::Array: return build_array_multiplier(width);
        case Architecture::Wallace: return build_wallace_multiplier(width);
        default: fail("only ARRAY and WALLACE multipliers can be generated");
    }
}

std::vector<bool> evaluate(const Netlist& netlist, const std::vector<bool>& bits) {
    if (bits.size() != netlist.input_count())
        fail("expected " + std::to_string(netlist.input_count()) + " input bits, got " + std::to_string(bits.size()));
    std::vector<bool> value(netlist.signal_count());
    for (std::size_t i = 0; i < bits.size(); ++i) value[i] = bits[i];
    for (const auto& g : netlist.gates()) {
        auto p = g.pins();
        value[g.output.index] = eval_gate(g.kind, value[p[0].index], p.size() > 1 && value[p[1].index],
                                          p.size() > 2 && value[p[2].index]);
    }
    std::vector<bool> out;
    out.reserve(netlist.outputs().size());
    for (auto s : netlist.outputs()) out.push_back(value[s.index]);
    return out;
}

std::vector<bool> input_bits(std::uint64_t packed, std::size_t n) {
    std::vector<bool> bits(n);
    for (std::size_t i = 0; i < n; ++i) bits[i] = (packed >> i) & 1U;
    return bits;
}

std::uint64_t multiply(const Netlist& netlist, std::uint64_t a, std::uint64_t b) {
    const int w = netlist.width();
    auto out = evaluate(netlist, input_bits(a | (b << w), netlist.input_count()));
    std::uint64_t p = 0;
    for (std::size_t i = 0; i < out.size(); ++i) p |= std::uint64_t{out[i]} << i;
    return p;
}

Netlist apply_permutation(const Netlist& netlist, std::uint32_t adder_id, const Permutation& perm) {
    const AdderInstance& a = netlist.adder(adder_id);
    if (perm.size() != a.inputs.size())
        fail("permutation " + perm.str() + " does not fit " + std::string(to_string(a.kind)) + " adder");
    Netlist out = netlist;
    AdderInstance& adder = out.adders_[adder_id];
    adder.permutation = adder.permutation.then(perm);
    for (const auto& sp : adder.slot_pins)
        out.gates_[sp.gate.index].inputs[sp.pin] = adder.inputs[adder.permutation[sp.slot]];
    out.finalize();
    return out;
}

void rewire(Netlist& netlist, std::uint32_t adder_id, const Permutation& absolute) {
    if (adder_id >= netlist.adders_.size()) fail("no adder " + std::to_string(adder_id));
    AdderInstance& adder = netlist.adders_[adder_id];
    if (absolute.size() != adder.inputs.size())
        fail("permutation " + absolute.str() + " does not fit " + std::string(to_string(adder.kind)) + " adder");
    adder.permutation = absolute;
    for (const auto& sp : adder.slot_pins)
        netlist.gates_[sp.gate.index].inputs[sp.pin] = adder.inputs[absolute[sp.slot]];
    auto is_member = [&](GateId g) { return netlist.gate_adder_[g.index] == static_cast<std::int32_t>(adder_id); };
    for (auto s : adder.inputs) {
        auto& fo = netlist.fanout_[s.index];
        std::erase_if(fo, is_member);
        for (auto g : adder.members)
            for (auto pin : netlist.gates_[g.index].pins())
                if (pin == s) fo.push_back(g);
        std::sort(fo.begin(), fo.end());
    }
}

// --- Text format -----------------------------------------------------------

void write_netlist(std::ostream& os, const Netlist& netlist) {
    os << "NETLIST " << to_string(netlist.architecture()) << ' ' << netlist.width() << ' '
       << netlist.input_count() << ' ' << netlist.gate_count() << ' ' << netlist.outputs().size() << '\n';
    for (std::size_t g = 0; g < netlist.gate_count(); ++g) {
        const Gate& gate = netlist.gates()[g];
        os << "GATE " << g << ' ' << to_string(gate.kind);
        for (auto s : gate.pins()) os << ' ' << s.index;
        os << " -> " << gate.output.index << '\n';
    }
    for (std::size_t k = 0; k < netlist.outputs().size(); ++k)
        os << "OUTPUT " << k << ' ' << netlist.outputs()[k].index << '\n';
    for (const auto& a : netlist.adders()) {
        os << "ADDER " << a.id << ' ' << to_string(a.kind) << ' ' << a.permutation.str();
        for (auto s : a.inputs) os << ' ' << s.index;
        os << " |";
        for (auto g : a.members) os << ' ' << g.index;
        os << '\n';
    }
}

Netlist read_netlist(std::istream& is) {
    std::string line;
    std::optional<NetlistBuilder> builder;
    Architecture arch = Architecture::Custom;
    int width = 0;
    std::size_t n_gates = 0;
    std::size_t n_outputs = 0;
    std::vector<SignalId> outputs;
    struct PendingAdder {
        AdderKind kind;
        Permutation perm;
        std::vector<SignalId> inputs;
        std::vector<GateId> members;
    };
    std::vector<PendingAdder> adders;
    std::vector<Gate> gates;

    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "NETLIST") {
            std::string a;
            std::size_t n_inputs = 0;
            ls >> a >> width >> n_inputs >> n_gates >> n_outputs;
            if (!ls) fail("malformed NETLIST header");
            arch = parse_architecture(a);
            builder.emplace(n_inputs);
        } else if (tag == "GATE") {
            if (!builder) fail("GATE before NETLIST header");
            std::size_t id = 0;
            std::string kind_text;
            ls >> id >> kind_text;
            GateKind kind = parse_gate_kind(kind_text);
            if (id != gates.size()) fail("gate ids must be dense and ordered");
            std::vector<SignalId> ins(arity(kind));
            for (auto& s : ins) ls >> s.index;
            std::string arrow;
            std::uint32_t out = 0;
            ls >> arrow >> out;
            if (!ls || arrow != "->") fail("malformed GATE line: " + line);
            SignalId got = builder->add_gate(kind, ins);
            if (got.index != out) fail("gate output id mismatch on line: " + line);
            Gate g;
            g.kind = kind;
            std::copy(ins.begin(), ins.end(), g.inputs.begin());
            g.output = got;
            gates.push_back(g);
        } else if (tag == "OUTPUT") {
            std::size_t k = 0;
            std::uint32_t s = 0;
            ls >> k >> s;
            if (!ls || k != outputs.size()) fail("malformed OUTPUT line: " + line);
            outputs.push_back(SignalId{s});
        } else if (tag == "ADDER") {
            std::uint32_t id = 0;
            std::string kind_text, perm_text;
            ls >> id >> kind_text >> perm_text;
            if (id != adders.size()) fail("adder ids must be dense and ordered");
            PendingAdder pa;
            pa.kind = kind_text == "FULL" ? AdderKind::Full : AdderKind::Half;
            if (kind_text != "FULL" && kind_text != "HALF") fail("unknown adder kind " + kind_text);
            pa.perm = Permutation::parse(perm_text);
            std::string tok;
            bool members = false;
            while (ls >> tok) {
                if (tok == "|") {
                    members = true;
                    continue;
                }
                auto v = static_cast<std::uint32_t>(std::stoul(tok));
                if (members)
                    pa.members.push_back(GateId{v});
                else
                    pa.inputs.push_back(SignalId{v});
            }
            adders.push_back(std::move(pa));
        } else {
            fail("unknown netlist record '" + tag + "'");
        }
    }
    if (!builder) fail("missing NETLIST header");
    if (gates.size() != n_gates || outputs.size() != n_outputs) fail("netlist record counts do not match header");
    for (auto s : outputs) builder->add_output(s);
    Netlist net = std::move(*builder).finish(arch, width);

    // Re-attach the adder registry using the fixed FA/HA templates.
    for (std::size_t id = 0; id < adders.size(); ++id) {
        const auto& pa = adders[id];
        AdderInstance a;
        a.id = static_cast<std::uint32_t>(id);
        a.kind = pa.kind;
        a.inputs = pa.inputs;
        a.members = pa.members;
        a.permutation = pa.perm;
        const auto& m = pa.members;
        if (pa.kind == AdderKind::Full) {
            if (m.size() != 6 || pa.inputs.size() != 3) fail("full adder record malformed");
            a.slot_pins = {{m[0], 0, 0}, {m[0], 1, 1}, {m[1], 0, 1}, {m[1], 1, 2},
                           {m[3], 0, 0}, {m[3], 1, 1}, {m[3], 2, 2}};
            a.sum = net.gates()[m[5].index].output;
            a.carry = net.gates()[m[3].index].output;
        } else {
            if (m.size() != 3 || pa.inputs.size() != 2) fail("half adder record malformed");
            a.slot_pins = {{m[0], 0, 0}, {m[0], 1, 1}, {m[1], 0, 0}, {m[1], 1, 1}};
            a.sum = net.gates()[m[0].index].output;
            a.carry = net.gates()[m[2].index].output;
        }
        for (const auto& sp : a.slot_pins)
            if (net.gates()[sp.gate.index].inputs[sp.pin] != a.inputs[a.permutation[sp.slot]])
                fail("adder " + std::to_string(id) + " wiring disagrees with its permutation");
        net.adders_.push_back(std::move(a));
    }
    net.finalize();
    return net;
}

}  // namespace agewire
