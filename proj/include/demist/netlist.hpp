#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "demist/aht.hpp"
#include "demist/errors.hpp"

namespace demist {

enum class GateKind : std::uint8_t { And, Nand, Or, Nor, Xor, Xnor, Not, Buf, Dff, Mux2 };
enum class Zone : std::uint8_t { Disruptive, NonDisruptive };

// Name of the derived save-path select signal. It is not a primary input:
// the simulator drives it from the supply schedule, and the parser binds
// references to it so instrumented netlists round-trip.
inline constexpr std::string_view kSelNetName = "SEL";

inline const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::And: return "AND";
        case GateKind::Nand: return "NAND";
        case GateKind::Or: return "OR";
        case GateKind::Nor: return "NOR";
        case GateKind::Xor: return "XOR";
        case GateKind::Xnor: return "XNOR";
        case GateKind::Not: return "NOT";
        case GateKind::Buf: return "BUF";
        case GateKind::Dff: return "DFF";
        default: return "MUX2";
    }
}

inline std::optional<GateKind> gate_kind_from_string(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (s == "AND") return GateKind::And;
    if (s == "NAND") return GateKind::Nand;
    if (s == "OR") return GateKind::Or;
    if (s == "NOR") return GateKind::Nor;
    if (s == "XOR") return GateKind::Xor;
    if (s == "XNOR") return GateKind::Xnor;
    if (s == "NOT" || s == "INV") return GateKind::Not;
    if (s == "BUF" || s == "BUFF") return GateKind::Buf;
    if (s == "DFF") return GateKind::Dff;
    if (s == "MUX2") return GateKind::Mux2;
    return std::nullopt;
}

struct Gate {
    std::uint32_t output = 0;
    GateKind kind = GateKind::And;
    Zone zone = Zone::Disruptive;
    std::vector<std::uint32_t> inputs; // MUX2: (sel, new, held)
};

// AHT attachment as carried by a netlist: static configuration only, the
// live state lives in the simulation run.
struct AhtAttachment {
    TriggerParams params;
    std::string victim;
    std::string payload;
    PayloadKind payload_kind = PayloadKind::XorFlip;
};

// Unvalidated construction material for a Netlist.
struct NetlistData {
    struct GateSpec {
        std::string output;
        GateKind kind = GateKind::And;
        std::vector<std::string> inputs;
        std::optional<Zone> zone; // unset => default by kind
    };
    std::string name = "top";
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<GateSpec> gates;
    std::vector<AhtAttachment> ahts;
};

struct NetlistStats {
    std::size_t gate_count = 0; // all gates, flip-flops included
    std::size_t dff_count = 0;
    std::size_t input_count = 0;
    std::size_t output_count = 0;
    std::size_t net_count = 0;
};

inline constexpr std::uint32_t kNoNet = 0xffffffffu;

// Immutable gate-level circuit graph. Validated on construction; safe to
// share read-only across concurrent simulation runs.
class Netlist {
public:
    explicit Netlist(NetlistData data) : data_(std::move(data)) { build(); }

    const std::string& name() const { return data_.name; }
    const std::vector<std::string>& net_names() const { return net_names_; }
    const std::string& net_name(std::uint32_t id) const { return net_names_[id]; }
    const std::vector<std::uint32_t>& inputs() const { return input_ids_; }
    const std::vector<std::uint32_t>& outputs() const { return output_ids_; }
    const std::vector<Gate>& gates() const { return gates_; }
    const std::vector<std::uint32_t>& topo_order() const { return topo_; }
    const std::vector<std::uint32_t>& dff_gates() const { return dff_gate_ids_; }
    const std::vector<AhtAttachment>& ahts() const { return data_.ahts; }
    const std::vector<std::string>& warnings() const { return warnings_; }
    std::uint32_t sel_net() const { return sel_net_; }
    bool has_sel() const { return sel_net_ != kNoNet; }

    std::uint32_t net_id(const std::string& name) const {
        auto it = net_index_.find(name);
        if (it == net_index_.end()) throw NetlistError("unknown net '" + name + "'");
        return it->second;
    }
    bool has_net(const std::string& name) const { return net_index_.count(name) != 0; }

    // Gate driving a net, or nullptr for primary inputs and SEL.
    const Gate* driver(std::uint32_t net) const {
        const auto g = driver_gate_[net];
        return g == kNoNet ? nullptr : &gates_[g];
    }
    bool is_primary_input(std::uint32_t net) const {
        return std::find(input_ids_.begin(), input_ids_.end(), net) != input_ids_.end();
    }

    NetlistStats stats() const {
        NetlistStats s;
        s.gate_count = gates_.size();
        s.dff_count = dff_gate_ids_.size();
        s.input_count = input_ids_.size();
        s.output_count = output_ids_.size();
        s.net_count = net_names_.size();
        return s;
    }

    // A copy of the construction material, for rewriting passes.
    NetlistData to_data() const { return data_; }

    std::string to_bench() const;

    // Nets whose driver is a save flip-flop inserted by wrap_state_saving,
    // identified structurally (DFF fed by a MUX2 whose select is SEL).
    std::vector<std::uint32_t> saved_nets() const {
        std::vector<std::uint32_t> out;
        for (const auto& g : gates_) {
            if (g.kind != GateKind::Dff) continue;
            const Gate* d = driver(g.inputs[0]);
            if (d && d->kind == GateKind::Mux2 && d->inputs[0] == sel_net_) out.push_back(g.output);
        }
        return out;
    }

private:
    void build();

    NetlistData data_;
    std::vector<std::string> net_names_;
    std::unordered_map<std::string, std::uint32_t> net_index_;
    std::vector<std::uint32_t> input_ids_;
    std::vector<std::uint32_t> output_ids_;
    std::vector<Gate> gates_;
    std::vector<std::uint32_t> driver_gate_; // net -> gate index or kNoNet
    std::vector<std::uint32_t> dff_gate_ids_;
    std::vector<std::uint32_t> topo_; // combinational gates only, dependency order
    std::uint32_t sel_net_ = kNoNet;
    std::vector<std::string> warnings_;
};

namespace detail {

inline std::size_t gate_min_arity(GateKind k) {
    switch (k) {
        case GateKind::Not:
        case GateKind::Buf:
        case GateKind::Dff: return 1;
        case GateKind::Mux2: return 3;
        default: return 2;
    }
}

inline bool gate_arity_ok(GateKind k, std::size_t n) {
    switch (k) {
        case GateKind::Not:
        case GateKind::Buf:
        case GateKind::Dff: return n == 1;
        case GateKind::Mux2: return n == 3;
        default: return n >= 2;
    }
}

inline void format_double(std::string& out, double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
}

} // namespace detail

inline void Netlist::build() {
    net_names_.clear();
    net_index_.clear();
    input_ids_.clear();
    output_ids_.clear();
    gates_.clear();
    dff_gate_ids_.clear();
    topo_.clear();
    warnings_.clear();
    sel_net_ = kNoNet;

    auto intern = [&](const std::string& n) -> std::uint32_t {
        auto it = net_index_.find(n);
        if (it != net_index_.end()) return it->second;
        const auto id = static_cast<std::uint32_t>(net_names_.size());
        net_names_.push_back(n);
        net_index_.emplace(n, id);
        return id;
    };

    for (const auto& in : data_.inputs) {
        if (in == kSelNetName) throw NetlistError("'SEL' is reserved and cannot be a primary input");
        if (net_index_.count(in)) throw NetlistError("net '" + in + "' declared more than once");
        input_ids_.push_back(intern(in));
    }

    // First pass: intern gate outputs so uniqueness is checked before inputs
    // introduce forward references.
    for (const auto& gs : data_.gates) {
        if (gs.output == kSelNetName)
            throw NetlistError("'SEL' is reserved and cannot be a gate output");
        if (net_index_.count(gs.output))
            throw NetlistError("net '" + gs.output + "' has more than one driver");
        intern(gs.output);
    }

    driver_gate_.assign(net_names_.size(), kNoNet);

    gates_.reserve(data_.gates.size());
    for (const auto& gs : data_.gates) {
        if (!detail::gate_arity_ok(gs.kind, gs.inputs.size()))
            throw NetlistError(std::string("gate '") + gs.output + "': " + gate_kind_name(gs.kind)
                               + " takes " + (detail::gate_min_arity(gs.kind) == 2 ? "at least 2" :
                                              std::to_string(detail::gate_min_arity(gs.kind)))
                               + " input(s), got " + std::to_string(gs.inputs.size()));
        Gate g;
        g.output = net_index_.at(gs.output);
        g.kind = gs.kind;
        if (gs.kind == GateKind::Dff || gs.kind == GateKind::Mux2) {
            if (gs.zone && *gs.zone == Zone::Disruptive)
                throw NetlistError("gate '" + gs.output + "': " + gate_kind_name(gs.kind)
                                   + " must stay in the non-disruptive zone");
            g.zone = Zone::NonDisruptive;
        } else {
            g.zone = gs.zone.value_or(Zone::Disruptive);
        }
        for (const auto& in : gs.inputs) {
            if (in == kSelNetName) {
                if (sel_net_ == kNoNet) {
                    sel_net_ = intern(std::string(kSelNetName));
                    driver_gate_.push_back(kNoNet);
                }
                g.inputs.push_back(sel_net_);
                continue;
            }
            auto it = net_index_.find(in);
            if (it == net_index_.end()) throw DanglingNetError(in);
            g.inputs.push_back(it->second);
        }
        const auto gid = static_cast<std::uint32_t>(gates_.size());
        driver_gate_[g.output] = gid;
        if (g.kind == GateKind::Dff) dff_gate_ids_.push_back(gid);
        gates_.push_back(std::move(g));
    }

    for (const auto& out : data_.outputs) {
        auto it = net_index_.find(out);
        if (it == net_index_.end()) throw DanglingNetError(out);
        output_ids_.push_back(it->second);
    }

    // Kahn's algorithm over the combinational subgraph; DFF outputs are
    // sources. The min-index tie break makes the order canonical.
    std::vector<std::uint32_t> indegree(gates_.size(), 0);
    std::vector<std::vector<std::uint32_t>> consumers(net_names_.size());
    std::size_t comb_count = 0;
    for (std::uint32_t gid = 0; gid < gates_.size(); ++gid) {
        if (gates_[gid].kind == GateKind::Dff) continue;
        ++comb_count;
        for (const auto in : gates_[gid].inputs) {
            const auto d = driver_gate_[in];
            if (d != kNoNet && gates_[d].kind != GateKind::Dff) {
                ++indegree[gid];
                consumers[in].push_back(gid);
            }
        }
    }
    std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> ready;
    for (std::uint32_t gid = 0; gid < gates_.size(); ++gid)
        if (gates_[gid].kind != GateKind::Dff && indegree[gid] == 0) ready.push(gid);
    while (!ready.empty()) {
        const auto gid = ready.top();
        ready.pop();
        topo_.push_back(gid);
        for (const auto c : consumers[gates_[gid].output])
            if (--indegree[c] == 0) ready.push(c);
    }
    if (topo_.size() != comb_count) {
        // Walk the leftover subgraph to name one actual cycle.
        std::vector<bool> leftover(gates_.size(), false);
        for (std::uint32_t gid = 0; gid < gates_.size(); ++gid)
            if (gates_[gid].kind != GateKind::Dff && indegree[gid] > 0) leftover[gid] = true;
        std::vector<std::uint32_t> path;
        std::vector<int> mark(gates_.size(), 0); // 0 unvisited, 1 on path, 2 done
        std::vector<std::string> cycle_nets;
        auto dfs = [&](auto&& self, std::uint32_t gid) -> bool {
            mark[gid] = 1;
            path.push_back(gid);
            for (const auto in : gates_[gid].inputs) {
                const auto d = driver_gate_[in];
                if (d == kNoNet || !leftover[d]) continue;
                if (mark[d] == 1) {
                    auto it = std::find(path.begin(), path.end(), d);
                    for (; it != path.end(); ++it)
                        cycle_nets.push_back(net_names_[gates_[*it].output]);
                    return true;
                }
                if (mark[d] == 0 && self(self, d)) return true;
            }
            path.pop_back();
            mark[gid] = 2;
            return false;
        };
        for (std::uint32_t gid = 0; gid < gates_.size() && cycle_nets.empty(); ++gid)
            if (leftover[gid] && mark[gid] == 0) dfs(dfs, gid);
        throw CombinationalCycleError(cycle_nets);
    }

    // Fanout-free internal gate outputs are tolerated (benchmarks keep test
    // points around) but reported.
    std::vector<bool> consumed(net_names_.size(), false);
    for (const auto& g : gates_)
        for (const auto in : g.inputs) consumed[in] = true;
    for (const auto out : output_ids_) consumed[out] = true;
    for (const auto& g : gates_)
        if (!consumed[g.output])
            warnings_.push_back("gate output '" + net_names_[g.output] + "' is never used");

    // AHT attachments: resolve and validate against the graph.
    for (const auto& a : data_.ahts) {
        a.params.validate();
        const auto vit = net_index_.find(a.victim);
        if (vit == net_index_.end()) throw NetlistError("aht victim net '" + a.victim + "' not found");
        const auto pit = net_index_.find(a.payload);
        if (pit == net_index_.end()) throw NetlistError("aht payload net '" + a.payload + "' not found");
        if (vit->second == pit->second)
            throw NetlistError("aht victim and payload must be distinct nets");
        const Gate* vd = driver(vit->second);
        if (!vd || vd->zone != Zone::Disruptive)
            throw NetlistError("aht victim '" + a.victim
                               + "' must be the output of a disruptive-zone gate");
        if (is_primary_input(pit->second))
            throw NetlistError("aht payload '" + a.payload + "' cannot be a primary input");
    }
}

// -------------------------------------------------------------------------
// .bench text front end
// -------------------------------------------------------------------------

namespace detail {

inline bool is_name_char(char c) {
    switch (c) {
        case ' ': case '\t': case '\r': case '\n':
        case '(': case ')': case '=': case ',': case '#': return false;
        default: return true;
    }
}

struct LineScanner {
    std::string_view text;
    std::size_t line_no;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }
    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }
    char peek() {
        skip_ws();
        return pos < text.size() ? text[pos] : '\0';
    }
    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c)
            throw BenchSyntaxError(line_no, pos + 1, std::string("expected '") + c + "'");
        ++pos;
    }
    std::string name() {
        skip_ws();
        const auto start = pos;
        while (pos < text.size() && is_name_char(text[pos])) ++pos;
        if (pos == start) throw BenchSyntaxError(line_no, pos + 1, "expected a net name");
        return std::string(text.substr(start, pos - start));
    }
};

inline double parse_pragma_double(const std::string& key, const std::string& val, std::size_t line) {
    double d = 0.0;
    const auto res = std::from_chars(val.data(), val.data() + val.size(), d);
    if (res.ec != std::errc() || res.ptr != val.data() + val.size())
        throw BenchSyntaxError(line, 1, "bad numeric value for '" + key + "'");
    return d;
}

inline void parse_aht_pragma(const std::vector<std::pair<std::string, std::string>>& kv,
                             std::size_t line, NetlistData& data) {
    AhtAttachment a;
    bool have_victim = false, have_payload = false;
    for (const auto& [k, v] : kv) {
        if (k == "victim") { a.victim = v; have_victim = true; }
        else if (k == "payload") { a.payload = v; have_payload = true; }
        else if (k == "kind") {
            const auto pk = payload_kind_from_string(v);
            if (!pk) throw BenchSyntaxError(line, 1, "unknown payload kind '" + v + "'");
            a.payload_kind = *pk;
        }
        else if (k == "c_unit") a.params.c_unit = parse_pragma_double(k, v, line);
        else if (k == "c_main") a.params.c_main = parse_pragma_double(k, v, line);
        else if (k == "c_new") a.params.c_new = parse_pragma_double(k, v, line);
        else if (k == "vdd") a.params.vdd_volts = parse_pragma_double(k, v, line);
        else if (k == "v_threshold") a.params.v_threshold = parse_pragma_double(k, v, line);
        else if (k == "retention_ns") a.params.retention_ns = parse_pragma_double(k, v, line);
        else if (k == "leak_tau_ns") a.params.leak_tau_ns = parse_pragma_double(k, v, line);
        else if (k == "gated") a.params.detector_gated_by_vdd = (v != "0");
        else throw BenchSyntaxError(line, 1, "unknown aht pragma key '" + k + "'");
    }
    if (!have_victim || !have_payload)
        throw BenchSyntaxError(line, 1, "aht pragma needs victim= and payload=");
    data.ahts.push_back(std::move(a));
}

} // namespace detail

// Parse ISCAS-style .bench text. Accepted lines: INPUT(x), OUTPUT(y),
// z = KIND(a, b, ...), blank lines and # comments. `# pragma demist ...`
// comments carry the zone and trigger-attachment extensions.
inline Netlist parse_bench(std::string_view text, std::string name = "top") {
    NetlistData data;
    data.name = std::move(name);
    std::vector<std::pair<std::string, std::size_t>> non_disruptive; // net, line
    std::vector<std::pair<std::string, std::size_t>> pending_zone_checks;

    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(start, end - start);
        if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
        ++line_no;
        start = end + 1;
        if (start > text.size() && raw.empty()) break;

        detail::LineScanner sc{raw, line_no};
        if (sc.at_end()) continue;
        if (sc.peek() == '#') {
            // Comments are skipped unless they are demist pragmas.
            ++sc.pos;
            auto eat_word = [&](std::string_view w) {
                sc.skip_ws();
                if (sc.text.substr(sc.pos, w.size()) != w) return false;
                const auto after = sc.pos + w.size();
                if (after < sc.text.size() && detail::is_name_char(sc.text[after])) return false;
                sc.pos = after;
                return true;
            };
            if (!eat_word("pragma") || !eat_word("demist")) continue;
            std::string directive = sc.name();
            if (directive == "zone") {
                std::string z = sc.name();
                if (z != "non_disruptive")
                    throw BenchSyntaxError(line_no, sc.pos, "zone pragma expects 'non_disruptive'");
                while (!sc.at_end()) non_disruptive.emplace_back(sc.name(), line_no);
            } else if (directive == "aht") {
                std::vector<std::pair<std::string, std::string>> kv;
                while (!sc.at_end()) {
                    std::string k = sc.name();
                    sc.expect('=');
                    kv.emplace_back(std::move(k), sc.name());
                }
                detail::parse_aht_pragma(kv, line_no, data);
            } else {
                throw BenchSyntaxError(line_no, sc.pos, "unknown pragma '" + directive + "'");
            }
            continue;
        }

        std::string first = sc.name();
        if (sc.peek() == '(') {
            std::string upper = first;
            std::transform(upper.begin(), upper.end(), upper.begin(),
                           [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
            sc.expect('(');
            std::string net = sc.name();
            sc.expect(')');
            if (!sc.at_end())
                throw BenchSyntaxError(line_no, sc.pos + 1, "trailing text after declaration");
            if (upper == "INPUT") data.inputs.push_back(std::move(net));
            else if (upper == "OUTPUT") data.outputs.push_back(std::move(net));
            else throw BenchSyntaxError(line_no, 1, "expected INPUT or OUTPUT, got '" + first + "'");
            continue;
        }

        sc.expect('=');
        std::string kind_str = sc.name();
        const auto kind = gate_kind_from_string(kind_str);
        if (!kind) throw UnknownGateKindError(kind_str, line_no);
        sc.expect('(');
        NetlistData::GateSpec gs;
        gs.output = std::move(first);
        gs.kind = *kind;
        gs.inputs.push_back(sc.name());
        while (sc.peek() == ',') {
            sc.expect(',');
            gs.inputs.push_back(sc.name());
        }
        sc.expect(')');
        if (!sc.at_end())
            throw BenchSyntaxError(line_no, sc.pos + 1, "trailing text after gate");
        data.gates.push_back(std::move(gs));
    }

    for (const auto& [net, line] : non_disruptive) {
        bool found = false;
        for (auto& gs : data.gates) {
            if (gs.output != net) continue;
            gs.zone = Zone::NonDisruptive;
            found = true;
            break;
        }
        if (!found)
            throw BenchSyntaxError(line, 1, "zone pragma names unknown gate output '" + net + "'");
    }

    return Netlist(std::move(data));
}

// Canonical serialization: INPUT lines, OUTPUT lines, pragmas, then DFFs
// followed by combinational gates in topological order. parse -> to_bench
// is a fixpoint.
inline std::string Netlist::to_bench() const {
    std::string out;
    for (const auto in : input_ids_) out += "INPUT(" + net_names_[in] + ")\n";
    for (const auto o : output_ids_) out += "OUTPUT(" + net_names_[o] + ")\n";
    for (const auto& g : gates_) {
        if (g.kind == GateKind::Dff || g.kind == GateKind::Mux2) continue;
        if (g.zone == Zone::NonDisruptive)
            out += "# pragma demist zone non_disruptive " + net_names_[g.output] + "\n";
    }
    for (const auto& a : data_.ahts) {
        out += "# pragma demist aht victim=" + a.victim + " payload=" + a.payload;
        out += " kind=";
        out += payload_kind_name(a.payload_kind);
        out += " c_unit=";
        detail::format_double(out, a.params.c_unit);
        out += " c_main=";
        detail::format_double(out, a.params.c_main);
        out += " c_new=";
        detail::format_double(out, a.params.c_new);
        out += " vdd=";
        detail::format_double(out, a.params.vdd_volts);
        out += " v_threshold=";
        detail::format_double(out, a.params.v_threshold);
        out += " retention_ns=";
        detail::format_double(out, a.params.retention_ns);
        out += " leak_tau_ns=";
        detail::format_double(out, a.params.leak_tau_ns);
        out += " gated=";
        out += a.params.detector_gated_by_vdd ? '1' : '0';
        out += '\n';
    }
    auto emit_gate = [&](const Gate& g) {
        out += net_names_[g.output];
        out += " = ";
        out += gate_kind_name(g.kind);
        out += '(';
        for (std::size_t i = 0; i < g.inputs.size(); ++i) {
            if (i) out += ", ";
            out += net_names_[g.inputs[i]];
        }
        out += ")\n";
    };
    for (const auto gid : dff_gate_ids_) emit_gate(gates_[gid]);
    for (const auto gid : topo_) emit_gate(gates_[gid]);
    return out;
}

// -------------------------------------------------------------------------
// Rewriting passes
// -------------------------------------------------------------------------

// Insert the save path for each named net: the raw combinational output is
// renamed away, a MUX2(SEL, raw, held) picks between new data and the held
// copy, and a flip-flop in the non-disruptive zone takes over the original
// name so downstream consumers and primary outputs read the saved value.
inline Netlist wrap_state_saving(const Netlist& n, const std::vector<std::string>& saved) {
    NetlistData data = n.to_data();
    std::unordered_set<std::string> seen;
    for (const auto& name : saved) {
        if (!seen.insert(name).second)
            throw NetlistError("net '" + name + "' listed twice in wrap request");
        if (!n.has_net(name)) throw NetlistError("net '" + name + "' not found");
        const Gate* d = n.driver(n.net_id(name));
        if (!d) throw NetlistError("net '" + name + "' is not a gate output");
        if (d->kind == GateKind::Dff) {
            const Gate* md = n.driver(d->inputs[0]);
            if (md && md->kind == GateKind::Mux2 && n.has_sel() && md->inputs[0] == n.sel_net())
                throw NetlistError("net '" + name + "' is already wrapped");
        }
        if (d->zone != Zone::Disruptive)
            throw NetlistError("net '" + name + "' is not driven by a disruptive-zone gate");

        auto unique_name = [&](std::string base) {
            std::string cand = base;
            int i = 1;
            while (n.has_net(cand) || seen.count(cand)) cand = base + std::to_string(i++);
            seen.insert(cand);
            return cand;
        };
        const std::string raw_name = unique_name(name + "_raw");
        const std::string mux_name = unique_name(name + "_mux");

        for (auto& gs : data.gates)
            if (gs.output == name) gs.output = raw_name;

        NetlistData::GateSpec mux;
        mux.output = mux_name;
        mux.kind = GateKind::Mux2;
        mux.inputs = {std::string(kSelNetName), raw_name, name};
        NetlistData::GateSpec dff;
        dff.output = name;
        dff.kind = GateKind::Dff;
        dff.inputs = {mux_name};
        data.gates.push_back(std::move(mux));
        data.gates.push_back(std::move(dff));
    }
    return Netlist(std::move(data));
}

// Attach a capacitance trigger to the netlist. The returned copy carries the
// attachment; the simulator instantiates live state per run.
inline Netlist inject_aht(const Netlist& n, AhtAttachment attachment) {
    NetlistData data = n.to_data();
    data.ahts.push_back(std::move(attachment));
    return Netlist(std::move(data)); // validation happens in build()
}

// Order-checker used by tests and callers that want an explicit certificate:
// every combinational gate must appear after all combinational drivers of
// its inputs, exactly once.
inline bool check_topo_order(const Netlist& n, const std::vector<std::uint32_t>& order) {
    std::size_t comb = 0;
    for (const auto& g : n.gates())
        if (g.kind != GateKind::Dff) ++comb;
    if (order.size() != comb) return false;
    std::vector<char> emitted(n.gates().size(), 0);
    for (const auto gid : order) {
        if (gid >= n.gates().size()) return false;
        const Gate& g = n.gates()[gid];
        if (g.kind == GateKind::Dff || emitted[gid]) return false;
        for (const auto in : g.inputs) {
            const Gate* d = n.driver(in);
            if (!d || d->kind == GateKind::Dff) continue;
            const auto did = static_cast<std::uint32_t>(d - n.gates().data());
            if (!emitted[did]) return false;
        }
        emitted[gid] = 1;
    }
    return true;
}

} // namespace demist
