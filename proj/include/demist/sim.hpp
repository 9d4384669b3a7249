#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "demist/aht.hpp"
#include "demist/errors.hpp"
#include "demist/logic.hpp"
#include "demist/netlist.hpp"
#include "demist/vddctl.hpp"

namespace demist {

// -------------------------------------------------------------------------
// Stimulus
// -------------------------------------------------------------------------

struct Stimulus {
    std::vector<std::vector<LogicValue>> vectors; // one entry per powered cycle
    TimeNs clock_period_ns = kDefaultClockPeriodNs;
};

inline void validate_stimulus(const Netlist& n, const Stimulus& s) {
    if (s.clock_period_ns <= 0) throw ConfigError("clock period must be positive");
    if (s.vectors.empty()) throw ConfigError("stimulus has no vectors");
    for (const auto& vec : s.vectors) {
        if (vec.size() != n.inputs().size())
            throw ConfigError("stimulus vector width " + std::to_string(vec.size())
                              + " does not match " + std::to_string(n.inputs().size())
                              + " primary inputs");
        for (const auto v : vec)
            if (v == LogicValue::X) throw ConfigError("stimulus vectors must be concrete");
    }
}

// Seeded uniform random vectors. Bits come straight from the engine output
// so the sequence is identical on every platform.
inline Stimulus random_stimulus(const Netlist& n, std::size_t count, std::uint64_t seed,
                                TimeNs clock_period_ns = kDefaultClockPeriodNs) {
    Stimulus s;
    s.clock_period_ns = clock_period_ns;
    std::mt19937_64 gen(seed);
    s.vectors.resize(count);
    for (auto& vec : s.vectors) {
        vec.resize(n.inputs().size());
        for (auto& b : vec) b = (gen() & 1u) ? LogicValue::One : LogicValue::Zero;
    }
    return s;
}

// One input alternates every vector, all others held at zero: a victim net
// reached from that input through an inverter/buffer chain toggles every
// powered cycle.
inline Stimulus directed_toggle_stimulus(const Netlist& n, std::size_t count,
                                         std::size_t toggle_input,
                                         TimeNs clock_period_ns = kDefaultClockPeriodNs) {
    if (toggle_input >= n.inputs().size()) throw ConfigError("toggle input index out of range");
    Stimulus s;
    s.clock_period_ns = clock_period_ns;
    s.vectors.resize(count);
    for (std::size_t j = 0; j < count; ++j) {
        s.vectors[j].assign(n.inputs().size(), LogicValue::Zero);
        s.vectors[j][toggle_input] = (j & 1u) ? LogicValue::One : LogicValue::Zero;
    }
    return s;
}

inline Stimulus concat_stimulus(Stimulus a, const Stimulus& b) {
    if (a.clock_period_ns != b.clock_period_ns)
        throw ConfigError("cannot concatenate stimuli with different clock periods");
    a.vectors.insert(a.vectors.end(), b.vectors.begin(), b.vectors.end());
    return a;
}

// Primary input whose inverter/buffer chain drives the given net, if any.
inline std::optional<std::size_t> find_toggle_input(const Netlist& n, const std::string& net) {
    std::uint32_t cur = n.net_id(net);
    for (std::size_t guard = 0; guard <= n.gates().size(); ++guard) {
        if (n.is_primary_input(cur)) {
            const auto& ins = n.inputs();
            return static_cast<std::size_t>(std::find(ins.begin(), ins.end(), cur) - ins.begin());
        }
        const Gate* d = n.driver(cur);
        if (!d || (d->kind != GateKind::Not && d->kind != GateKind::Buf)) return std::nullopt;
        cur = d->inputs[0];
    }
    return std::nullopt;
}

// -------------------------------------------------------------------------
// Simulation state
// -------------------------------------------------------------------------

enum class InitPolicy : std::uint8_t { AllZero, AllX };

struct SimState {
    std::vector<LogicValue> net_values; // by net id, settled for the current cycle
    std::vector<LogicValue> dff_values; // by DFF slot (index into Netlist::dff_gates())
    TimeNs time_ns = 0;
    std::uint64_t cycle = 0;
    bool prev_disruptive_on = true;     // powering of the just-finished cycle
    bool prev_non_disruptive_on = true;
};

namespace detail {

inline LogicValue eval_gate(const Gate& g, const std::vector<LogicValue>& v) {
    switch (g.kind) {
        case GateKind::Not: return lv_not(v[g.inputs[0]]);
        case GateKind::Buf: return v[g.inputs[0]];
        case GateKind::Mux2: return lv_mux(v[g.inputs[0]], v[g.inputs[1]], v[g.inputs[2]]);
        default: break;
    }
    LogicValue acc = v[g.inputs[0]];
    for (std::size_t i = 1; i < g.inputs.size(); ++i) {
        const LogicValue b = v[g.inputs[i]];
        switch (g.kind) {
            case GateKind::And: case GateKind::Nand: acc = lv_and(acc, b); break;
            case GateKind::Or: case GateKind::Nor: acc = lv_or(acc, b); break;
            default: acc = lv_xor(acc, b); break; // XOR / XNOR
        }
    }
    switch (g.kind) {
        case GateKind::Nand: case GateKind::Nor: case GateKind::Xnor: return lv_not(acc);
        default: return acc;
    }
}

inline void eval_combinational(const Netlist& n, std::vector<LogicValue>& v, bool disruptive_on,
                               bool non_disruptive_on) {
    for (const auto gid : n.topo_order()) {
        const Gate& g = n.gates()[gid];
        const bool on = g.zone == Zone::Disruptive ? disruptive_on : non_disruptive_on;
        v[g.output] = on ? eval_gate(g, v) : LogicValue::X;
    }
}

// Latch every flip-flop from the settled values of the finished cycle. The
// save-path MUX has already chosen between new data and the held copy, so a
// uniform latch implements both capture and hold.
inline void latch_dffs(const Netlist& n, SimState& st) {
    std::vector<LogicValue> next(n.dff_gates().size());
    for (std::size_t i = 0; i < n.dff_gates().size(); ++i) {
        const Gate& g = n.gates()[n.dff_gates()[i]];
        const bool on = g.zone == Zone::Disruptive ? st.prev_disruptive_on
                                                   : st.prev_non_disruptive_on;
        next[i] = on ? st.net_values[g.inputs[0]] : LogicValue::X;
    }
    st.dff_values = std::move(next);
    for (std::size_t i = 0; i < n.dff_gates().size(); ++i)
        st.net_values[n.gates()[n.dff_gates()[i]].output] = st.dff_values[i];
}

} // namespace detail

inline SimState init_state(const Netlist& n, InitPolicy policy = InitPolicy::AllZero) {
    SimState st;
    st.net_values.assign(n.net_names().size(), LogicValue::X);
    const LogicValue dff_init = policy == InitPolicy::AllZero ? LogicValue::Zero : LogicValue::X;
    st.dff_values.assign(n.dff_gates().size(), dff_init);
    for (const auto in : n.inputs()) st.net_values[in] = LogicValue::Zero;
    for (std::size_t i = 0; i < n.dff_gates().size(); ++i)
        st.net_values[n.gates()[n.dff_gates()[i]].output] = st.dff_values[i];
    if (n.has_sel()) st.net_values[n.sel_net()] = LogicValue::One;
    detail::eval_combinational(n, st.net_values, true, true);
    return st;
}

inline SimState init_state(const Netlist& n, const std::vector<LogicValue>& dff_init) {
    if (dff_init.size() != n.dff_gates().size())
        throw ConfigError("dff init vector length does not match flip-flop count");
    SimState st = init_state(n, InitPolicy::AllZero);
    st.dff_values = dff_init;
    for (std::size_t i = 0; i < n.dff_gates().size(); ++i)
        st.net_values[n.gates()[n.dff_gates()[i]].output] = st.dff_values[i];
    detail::eval_combinational(n, st.net_values, true, true);
    return st;
}

// One synchronous step: latch flip-flops at the boundary, apply the next
// input vector, then settle combinational logic under the given zone power.
inline SimState eval_cycle(const Netlist& n, SimState state, const std::vector<LogicValue>& inputs,
                           bool disruptive_on, bool non_disruptive_on = true) {
    if (inputs.size() != n.inputs().size()) throw ConfigError("input vector width mismatch");
    detail::latch_dffs(n, state);
    for (std::size_t i = 0; i < inputs.size(); ++i) state.net_values[n.inputs()[i]] = inputs[i];
    if (n.has_sel())
        state.net_values[n.sel_net()] = disruptive_on ? LogicValue::One : LogicValue::Zero;
    detail::eval_combinational(n, state.net_values, disruptive_on, non_disruptive_on);
    state.prev_disruptive_on = disruptive_on;
    state.prev_non_disruptive_on = non_disruptive_on;
    state.cycle += 1;
    state.time_ns += kDefaultClockPeriodNs;
    return state;
}

// -------------------------------------------------------------------------
// Trace
// -------------------------------------------------------------------------

struct TriggerEvent {
    TimeNs time_ns = 0;
    std::size_t aht_index = 0;
};

struct Trace {
    TimeNs clock_period_ns = kDefaultClockPeriodNs;
    TimeNs horizon_ns = 0;

    std::vector<std::string> recorded_nets;
    std::vector<TimeNs> sample_times;
    std::vector<std::vector<LogicValue>> samples; // [net][sample]
    std::vector<std::uint8_t> vdd_disruptive;     // per sample
    std::vector<std::uint8_t> vdd_non_disruptive; // per sample
    std::vector<std::vector<double>> aht_voltage;      // [aht][sample]
    std::vector<std::vector<std::uint8_t>> aht_fired;  // [aht][sample]
    std::vector<TriggerEvent> trigger_events;

    std::vector<std::uint64_t> toggles_per_cycle; // concrete value changes at each boundary
    std::vector<std::uint8_t> sel_per_cycle;      // 1 = fully powered disruptive cycle

    // Stall-free view of the save path: row 0 is the initial flip-flop
    // contents, then one row per powered cycle with the values captured at
    // its closing boundary.
    std::vector<std::string> saved_net_names;
    std::vector<std::vector<LogicValue>> logical_outputs;
    std::vector<std::uint64_t> logical_latch_cycle;

    std::size_t stall_cycles = 0;
};

struct ZoneSchedules {
    VddSchedule disruptive;
    VddSchedule non_disruptive;
};

inline ZoneSchedules uniform_schedules(const VddSchedule& disruptive) {
    return {disruptive, always_on(disruptive.horizon_ns)};
}

inline std::vector<AhtInstance> make_aht_instances(const Netlist& n) {
    std::vector<AhtInstance> out;
    for (const auto& a : n.ahts()) {
        AhtInstance inst;
        inst.params = a.params;
        inst.victim_net = n.net_id(a.victim);
        inst.payload_net = n.net_id(a.payload);
        inst.payload_kind = a.payload_kind;
        out.push_back(inst);
    }
    return out;
}

// Horizon that gives a duty-cycled run exactly `count` fully powered cycles,
// so runs at different duties consume the same stimulus.
inline TimeNs horizon_for_powered_cycles(const VddSchedule& sched, TimeNs clock_ns,
                                         std::size_t count) {
    std::size_t powered = 0;
    TimeNs t = 0;
    const TimeNs cap = static_cast<TimeNs>(count) * clock_ns * 100;
    while (powered < count) {
        if (powered_throughout(sched, t, clock_ns)) ++powered;
        t += clock_ns;
        if (t > cap) throw SimError("schedule never accumulates the requested powered cycles");
    }
    return t;
}

struct RunOptions {
    InitPolicy init = InitPolicy::AllZero;
    std::vector<std::string> record_nets; // empty = inputs, outputs, SEL, AHT nets
    bool record_all_nets = false;
};

namespace detail {

inline std::vector<std::uint32_t> pick_recorded(const Netlist& n, const std::vector<AhtInstance>& ahts,
                                                const RunOptions& opts) {
    std::vector<std::uint32_t> ids;
    std::unordered_set<std::uint32_t> seen;
    auto add = [&](std::uint32_t id) {
        if (seen.insert(id).second) ids.push_back(id);
    };
    if (opts.record_all_nets) {
        for (std::uint32_t i = 0; i < n.net_names().size(); ++i) add(i);
        return ids;
    }
    if (!opts.record_nets.empty()) {
        for (const auto& name : opts.record_nets) add(n.net_id(name));
        return ids;
    }
    for (const auto id : n.inputs()) add(id);
    for (const auto id : n.outputs()) add(id);
    if (n.has_sel()) add(n.sel_net());
    for (const auto& a : ahts) {
        add(a.victim_net);
        add(a.payload_net);
    }
    for (const auto id : n.saved_nets()) add(id);
    return ids;
}

} // namespace detail

inline Trace run(const Netlist& n, const Stimulus& s, const ZoneSchedules& scheds,
                 std::vector<AhtInstance> ahts, TimeNs horizon_ns, const RunOptions& opts = {}) {
    validate_stimulus(n, s);
    const TimeNs T = s.clock_period_ns;
    if (horizon_ns < T) throw SimError("horizon shorter than one clock period");
    const std::uint64_t cycles = static_cast<std::uint64_t>(horizon_ns / T);
    const TimeNs end_ns = static_cast<TimeNs>(cycles) * T;
    if (scheds.disruptive.horizon_ns < end_ns || scheds.non_disruptive.horizon_ns < end_ns)
        throw SimError("schedule horizon shorter than requested run");
    for (const auto& inst : ahts) {
        inst.params.validate();
        if (inst.victim_net >= n.net_names().size() || inst.payload_net >= n.net_names().size())
            throw SimError("aht instance references a net outside this netlist");
    }

    Trace tr;
    tr.clock_period_ns = T;
    tr.horizon_ns = end_ns;
    tr.toggles_per_cycle.assign(cycles, 0);
    tr.sel_per_cycle.assign(cycles, 0);
    const auto recorded = detail::pick_recorded(n, ahts, opts);
    tr.recorded_nets.reserve(recorded.size());
    for (const auto id : recorded) tr.recorded_nets.push_back(n.net_name(id));
    tr.samples.resize(recorded.size());
    tr.aht_voltage.resize(ahts.size());
    tr.aht_fired.resize(ahts.size());
    const auto saved = n.saved_nets();
    for (const auto id : saved) tr.saved_net_names.push_back(n.net_name(id));

    SimState st = init_state(n, opts.init);
    // Row 0 of the logical view: initial save-DFF contents.
    if (!saved.empty()) {
        std::vector<LogicValue> row;
        for (const auto id : saved) row.push_back(st.net_values[id]);
        tr.logical_outputs.push_back(std::move(row));
        tr.logical_latch_cycle.push_back(0);
    }

    auto sample = [&](TimeNs t) {
        tr.sample_times.push_back(t);
        for (std::size_t i = 0; i < recorded.size(); ++i)
            tr.samples[i].push_back(st.net_values[recorded[i]]);
        tr.vdd_disruptive.push_back(vdd_at(scheds.disruptive, t) ? 1 : 0);
        tr.vdd_non_disruptive.push_back(vdd_at(scheds.non_disruptive, t) ? 1 : 0);
        for (std::size_t a = 0; a < ahts.size(); ++a) {
            tr.aht_voltage[a].push_back(ahts[a].state.v_cap);
            tr.aht_fired[a].push_back(ahts[a].state.fired ? 1 : 0);
        }
    };
    auto record_logical = [&](std::uint64_t boundary_cycle) {
        if (saved.empty() || !st.prev_disruptive_on) return;
        std::vector<LogicValue> row;
        for (const auto id : saved) row.push_back(st.net_values[id]);
        tr.logical_outputs.push_back(std::move(row));
        tr.logical_latch_cycle.push_back(boundary_cycle);
    };
    auto step_ahts = [&](bool vdd_on, TimeNs t) {
        for (std::size_t a = 0; a < ahts.size(); ++a) {
            const LogicValue victim = st.net_values[ahts[a].victim_net];
            if (const auto ev = trigger_step(ahts[a], victim, vdd_on, t))
                tr.trigger_events.push_back({*ev, a});
        }
    };
    auto apply_payloads = [&]() {
        if (ahts.empty()) return;
        std::vector<std::pair<std::uint32_t, LogicValue>> forced;
        for (const auto& inst : ahts) {
            if (!inst.state.fired) continue;
            const LogicValue cur = st.net_values[inst.payload_net];
            LogicValue f = cur;
            switch (inst.payload_kind) {
                case PayloadKind::XorFlip: f = lv_not(cur); break;
                case PayloadKind::ForceOne: f = LogicValue::One; break;
                case PayloadKind::ForceZero: f = LogicValue::Zero; break;
            }
            forced.emplace_back(inst.payload_net, f);
        }
        if (forced.empty()) return;
        std::unordered_set<std::uint32_t> forced_nets;
        std::vector<char> dirty(n.net_names().size(), 0);
        for (const auto& [net, val] : forced) {
            forced_nets.insert(net);
            if (st.net_values[net] != val) {
                st.net_values[net] = val;
                dirty[net] = 1;
            }
        }
        // Push the corruption through the downstream cone; the forced nets
        // themselves stay pinned.
        for (const auto gid : n.topo_order()) {
            const Gate& g = n.gates()[gid];
            if (forced_nets.count(g.output)) continue;
            bool touched = false;
            for (const auto in : g.inputs) touched = touched || dirty[in];
            if (!touched) continue;
            const bool on = g.zone == Zone::Disruptive ? st.prev_disruptive_on
                                                       : st.prev_non_disruptive_on;
            const LogicValue nv = on ? detail::eval_gate(g, st.net_values) : LogicValue::X;
            if (nv != st.net_values[g.output]) {
                st.net_values[g.output] = nv;
                dirty[g.output] = 1;
            }
        }
    };

    std::vector<LogicValue> prev_settled;
    std::size_t vec_idx = 0;
    for (std::uint64_t k = 0; k < cycles; ++k) {
        const TimeNs t0 = static_cast<TimeNs>(k) * T;
        const bool powered_d = powered_throughout(scheds.disruptive, t0, T);
        const bool powered_nd = powered_throughout(scheds.non_disruptive, t0, T);

        if (k > 0) {
            detail::latch_dffs(n, st);
            record_logical(k);
        }
        if (powered_d && vec_idx < s.vectors.size()) {
            const auto& vec = s.vectors[vec_idx++];
            for (std::size_t i = 0; i < vec.size(); ++i) st.net_values[n.inputs()[i]] = vec[i];
        }
        if (n.has_sel())
            st.net_values[n.sel_net()] = powered_d ? LogicValue::One : LogicValue::Zero;
        detail::eval_combinational(n, st.net_values, powered_d, powered_nd);
        st.prev_disruptive_on = powered_d;
        st.prev_non_disruptive_on = powered_nd;
        st.cycle = k;
        st.time_ns = t0;

        step_ahts(vdd_at(scheds.disruptive, t0), t0);
        apply_payloads();

        if (k > 0) {
            std::uint64_t toggles = 0;
            for (std::size_t i = 0; i < st.net_values.size(); ++i)
                if (is_concrete(prev_settled[i]) && is_concrete(st.net_values[i])
                    && prev_settled[i] != st.net_values[i])
                    ++toggles;
            tr.toggles_per_cycle[k] = toggles;
        }
        tr.sel_per_cycle[k] = powered_d ? 1 : 0;
        if (!powered_d) ++tr.stall_cycles;
        prev_settled = st.net_values;

        sample(t0);

        // Supply edges inside the cycle only touch analog state and flags;
        // net values hold until the next boundary.
        auto ed = schedule_edges(scheds.disruptive, t0 + 1, t0 + T);
        const auto en = schedule_edges(scheds.non_disruptive, t0 + 1, t0 + T);
        std::vector<std::pair<VddEdge, bool>> merged; // bool = disruptive edge
        for (const auto& e : ed) merged.push_back({e, true});
        for (const auto& e : en) merged.push_back({e, false});
        std::sort(merged.begin(), merged.end(),
                  [](const auto& a, const auto& b) { return a.first.t_ns < b.first.t_ns; });
        for (const auto& [e, is_disruptive] : merged) {
            if (is_disruptive) step_ahts(e.now_on, e.t_ns);
            sample(e.t_ns);
        }
    }

    // Closing boundary: final latch and terminal sample at the horizon.
    detail::latch_dffs(n, st);
    record_logical(cycles);
    step_ahts(vdd_at(scheds.disruptive, end_ns), end_ns);
    st.cycle = cycles;
    st.time_ns = end_ns;
    sample(end_ns);

    return tr;
}

// Convenience wrapper: schedules derived from one duty fraction, AHTs taken
// from the netlist's attachments.
inline Trace run_with_duty(const Netlist& n, const Stimulus& s, double duty, TimeNs period_ns,
                           TimeNs horizon_ns, const RunOptions& opts = {}) {
    const auto sched = schedule_from_duty(period_ns, duty, 0, horizon_ns);
    return run(n, s, uniform_schedules(sched), make_aht_instances(n), horizon_ns, opts);
}

} // namespace demist
