#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "demist/aht.hpp"
#include "demist/errors.hpp"

namespace demist {

// Periodic supply waveform for one power zone: on for round(duty*period)
// ns from each period start, off for the remainder, shifted by phase.
struct VddSchedule {
    TimeNs period_ns = 1000;
    double duty = 1.0;
    TimeNs phase_ns = 0;
    TimeNs horizon_ns = 0;

    TimeNs on_ns() const { return static_cast<TimeNs>(std::llround(duty * static_cast<double>(period_ns))); }
};

inline VddSchedule schedule_from_duty(TimeNs period_ns, double duty, TimeNs phase_ns,
                                      TimeNs horizon_ns) {
    if (period_ns <= 0) throw ConfigError("schedule period must be positive");
    if (!(duty > 0.0) || duty > 1.0) throw ConfigError("duty must be in (0, 1]");
    if (phase_ns < 0) throw ConfigError("schedule phase must be >= 0");
    if (horizon_ns < 0) throw ConfigError("schedule horizon must be >= 0");
    VddSchedule s{period_ns, duty, phase_ns, horizon_ns};
    if (duty < 1.0 && s.on_ns() < kDefaultClockPeriodNs)
        throw ConfigError("on-window shorter than one clock period");
    return s;
}

inline VddSchedule always_on(TimeNs horizon_ns) {
    return schedule_from_duty(1000, 1.0, 0, horizon_ns);
}

inline bool vdd_at(const VddSchedule& s, TimeNs t_ns) {
    if (t_ns < 0 || t_ns > s.horizon_ns) throw SimError("time outside schedule horizon");
    const TimeNs on = s.on_ns();
    if (on >= s.period_ns) return true;
    TimeNs pos = (t_ns - s.phase_ns) % s.period_ns;
    if (pos < 0) pos += s.period_ns;
    return pos < on;
}

// Supply transition instants in [t0, t1), each paired with the level the
// supply takes from that instant on. Used by the simulator to apply
// intra-cycle leakage segments and off-redistribution exactly at edges.
struct VddEdge {
    TimeNs t_ns;
    bool now_on;
};

inline std::vector<VddEdge> schedule_edges(const VddSchedule& s, TimeNs t0, TimeNs t1) {
    std::vector<VddEdge> edges;
    const TimeNs on = s.on_ns();
    if (on >= s.period_ns || on <= 0) return edges; // constant level, no edges
    // First period whose window could intersect [t0, t1).
    TimeNs k = (t0 - s.phase_ns) / s.period_ns - 2;
    for (;; ++k) {
        const TimeNs rise = s.phase_ns + k * s.period_ns;
        const TimeNs fall = rise + on;
        if (rise >= t1) break;
        if (rise >= t0) edges.push_back({rise, true});
        if (fall >= t1) break;
        if (fall >= t0) edges.push_back({fall, false});
    }
    return edges;
}

// -------------------------------------------------------------------------
// Power-gating control circuit: a counter, a negative-edge state bit and a
// PMOS switch. The state bit flips when the counter reaches the maximum for
// the current phase; each phase therefore spans counter_max+1 clock cycles.
// -------------------------------------------------------------------------

struct ControlCircuit {
    std::uint32_t counter_max_on = 0;
    std::uint32_t counter_max_off = 0;
    std::uint32_t count = 0;
    bool on_state = true;

    bool pmos_conducting() const { return on_state; }
};

// Advance by one clock edge. State only changes at negative edges: the
// counter is compared against the active maximum and, on a match, the state
// bit flips and the counter clears. A phase whose maximum is zero is left
// again at the same edge, so counter_max_off = 0 degenerates to always-on.
inline void control_circuit_step(ControlCircuit& c, bool negedge) {
    if (!negedge) return;
    const auto active_max = [&] { return c.on_state ? c.counter_max_on : c.counter_max_off; };
    if (c.count == active_max()) {
        c.on_state = !c.on_state;
        c.count = 0;
        if (active_max() == 0) c.on_state = !c.on_state; // skip a zero-length phase
    } else {
        ++c.count;
    }
}

// Schedule parameters whose waveform the control circuit reproduces
// cycle for cycle: on for max_on+1 cycles, off for max_off+1.
inline VddSchedule control_circuit_schedule(const ControlCircuit& c, TimeNs clock_ns,
                                            TimeNs horizon_ns) {
    if (c.counter_max_off == 0) return always_on(horizon_ns);
    const TimeNs on_cycles = c.counter_max_on + 1;
    const TimeNs off_cycles = c.counter_max_off + 1;
    const TimeNs period = (on_cycles + off_cycles) * clock_ns;
    const double duty = static_cast<double>(on_cycles) / static_cast<double>(on_cycles + off_cycles);
    return schedule_from_duty(period, duty, 0, horizon_ns);
}

// -------------------------------------------------------------------------
// Duty-cycle bracketing oracle over the bare trigger dynamics
// -------------------------------------------------------------------------

// True iff the supply is on throughout [t0, t0 + len). Periodicity is used
// directly so the query is free of horizon bounds.
inline bool powered_throughout(const VddSchedule& s, TimeNs t0, TimeNs len) {
    const TimeNs on = s.on_ns();
    if (on >= s.period_ns) return true;
    TimeNs pos = (t0 - s.phase_ns) % s.period_ns;
    if (pos < 0) pos += s.period_ns;
    return pos + len <= on;
}

// March the capacitor through a duty-cycled run without a netlist: the
// victim takes a fresh value at each fully powered cycle, so a charge lands
// on every boundary between two fully powered cycles. A cycle that is only
// partially powered degrades the victim, and the first value after a
// restore arrives from the degraded state, which is not a toggle — both
// match the gate-level simulator cycle for cycle. Returns the maximum
// capacitor voltage reached over the horizon.
inline double max_toggle_voltage(const TriggerParams& p, const VddSchedule& sched,
                                 TimeNs toggle_period_ns) {
    p.validate();
    if (toggle_period_ns <= 0) throw ConfigError("toggle period must be positive");
    auto edges = schedule_edges(sched, 0, sched.horizon_ns + 1);
    std::size_t next_edge = 0;
    double v = 0.0, max_v = 0.0;
    TimeNs now = 0;
    bool prev_cycle_on = powered_throughout(sched, 0, toggle_period_ns);
    for (TimeNs t = toggle_period_ns; t <= sched.horizon_ns; t += toggle_period_ns) {
        while (next_edge < edges.size() && edges[next_edge].t_ns <= t) {
            const auto& e = edges[next_edge++];
            v = leakage_decay(p, v, static_cast<double>(e.t_ns - now));
            now = e.t_ns;
            if (!e.now_on) v = off_redistribute(p, v);
        }
        v = leakage_decay(p, v, static_cast<double>(t - now));
        now = t;
        const bool cycle_on = powered_throughout(sched, t, toggle_period_ns);
        if (prev_cycle_on && cycle_on) {
            v += charge_share_delta(p, v);
            if (v > max_v) max_v = v;
        }
        prev_cycle_on = cycle_on;
    }
    return max_v;
}

inline bool duty_fires(const TriggerParams& p, double duty, TimeNs sched_period_ns,
                       TimeNs toggle_period_ns, TimeNs horizon_ns) {
    if (!(duty > 0.0)) return false; // never powered, never charges
    const auto sched = schedule_from_duty(sched_period_ns, duty, 0, horizon_ns);
    return max_toggle_voltage(p, sched, toggle_period_ns) >= p.v_threshold;
}

// Largest duty (to within tolerance) at which the capacitor stays below
// threshold over a horizon of ten full-duty trigger times. Returns 1.0 when
// even an uninterrupted supply never reaches threshold.
inline double critical_duty(const TriggerParams& p, TimeNs victim_toggle_period_ns,
                            TimeNs sched_period_ns, double tolerance) {
    p.validate();
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (sched_period_ns <= 0) throw ConfigError("schedule period must be positive");
    const long k_full = toggles_to_trigger(p, 0.0);
    if (k_full == kNeverTriggers) return 1.0;
    // Fast triggers need at least a few schedule periods to see the off windows.
    const TimeNs horizon = std::max(10 * static_cast<TimeNs>(k_full) * victim_toggle_period_ns,
                                    3 * sched_period_ns);
    if (!duty_fires(p, 1.0, sched_period_ns, victim_toggle_period_ns, horizon)) return 1.0;
    double lo = 0.0, hi = 1.0; // lo certified safe, hi known to fire
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (duty_fires(p, mid, sched_period_ns, victim_toggle_period_ns, horizon)) hi = mid;
        else lo = mid;
    }
    return lo;
}

} // namespace demist
