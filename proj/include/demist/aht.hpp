#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "demist/errors.hpp"
#include "demist/logic.hpp"

namespace demist {

using TimeNs = std::int64_t;

// How a fired trigger corrupts its payload net.
enum class PayloadKind : std::uint8_t { XorFlip, ForceOne, ForceZero };

inline const char* payload_kind_name(PayloadKind k) {
    switch (k) {
        case PayloadKind::XorFlip: return "xor_flip";
        case PayloadKind::ForceOne: return "force_one";
        default: return "force_zero";
    }
}

inline std::optional<PayloadKind> payload_kind_from_string(const std::string& s) {
    if (s == "xor_flip") return PayloadKind::XorFlip;
    if (s == "force_one") return PayloadKind::ForceOne;
    if (s == "force_zero") return PayloadKind::ForceZero;
    return std::nullopt;
}

// Capacitances are relative units; only their ratios enter the charge-share
// fraction. Voltages are volts, times are nanoseconds.
struct TriggerParams {
    double c_unit = 1.0;
    double c_main = 1.0;
    double c_new = 0.0; // 0 => baseline trigger, >0 => fortified
    double vdd_volts = 1.0;
    double v_threshold = 0.8;
    double retention_ns = 30000.0;
    double leak_tau_ns = 1.0;
    bool detector_gated_by_vdd = true;

    double alpha() const { return c_unit / (c_unit + c_main + c_new); }
    bool fortified() const { return c_new > 0.0; }

    void validate() const {
        if (!(c_unit > 0.0)) throw ConfigError("c_unit must be > 0");
        if (!(c_main > 0.0)) throw ConfigError("c_main must be > 0");
        if (!(c_new >= 0.0)) throw ConfigError("c_new must be >= 0");
        if (!(vdd_volts > 0.0)) throw ConfigError("vdd must be > 0");
        if (!(v_threshold > 0.0 && v_threshold < vdd_volts))
            throw ConfigError("v_threshold must lie strictly between 0 and vdd");
        if (!(retention_ns > 0.0)) throw ConfigError("retention_ns must be > 0");
        if (!(leak_tau_ns > 0.0)) throw ConfigError("leak_tau_ns must be > 0");
    }
};

// Single charge-share event: the unit capacitor, charged to VDD, is switched
// in parallel with the main (and, when fortified, the extra) capacitance.
inline double charge_share_delta(const TriggerParams& p, double v0) {
    return p.c_unit * (p.vdd_volts - v0) / (p.c_unit + p.c_main + p.c_new);
}

// Voltage after k charge-share events starting from v_init, ignoring leakage.
// Closed form of iterating charge_share_delta k times.
inline double accumulate(const TriggerParams& p, long k, double v_init) {
    const double a = p.alpha();
    return p.vdd_volts - (p.vdd_volts - v_init) * std::pow(1.0 - a, static_cast<double>(k));
}

inline constexpr long kNeverTriggers = -1;

// Smallest toggle count that lifts the capacitor to the detection threshold,
// or kNeverTriggers if the threshold is unreachable. Exact: the closed-form
// estimate is corrected by direct evaluation around the boundary.
inline long toggles_to_trigger(const TriggerParams& p, double v_init) {
    if (v_init >= p.v_threshold) return 0;
    if (p.v_threshold >= p.vdd_volts) return kNeverTriggers;
    const double a = p.alpha();
    if (!(a > 0.0)) return kNeverTriggers;
    // (1-a)^k <= (vdd - v_th) / (vdd - v_init)
    const double ratio = (p.vdd_volts - p.v_threshold) / (p.vdd_volts - v_init);
    double est = std::log(ratio) / std::log(1.0 - a);
    long k = static_cast<long>(std::ceil(est));
    if (k < 1) k = 1;
    while (k > 1 && accumulate(p, k - 1, v_init) >= p.v_threshold) --k;
    while (accumulate(p, k, v_init) < p.v_threshold) {
        ++k;
        if (k > 100000000L) return kNeverTriggers;
    }
    return k;
}

// Exponential self-discharge over dt nanoseconds.
inline double leakage_decay(const TriggerParams& p, double v, double dt_ns) {
    if (dt_ns <= 0.0) return v;
    return v * std::exp(-dt_ns / p.leak_tau_ns);
}

// One-shot charge conservation when the supply drops and the extra
// capacitance is switched in parallel with the main one. Identity for the
// baseline trigger.
inline double off_redistribute(const TriggerParams& p, double v) {
    if (p.c_new <= 0.0) return v;
    return v * p.c_main / (p.c_main + p.c_new);
}

// Time for leakage to pull a fired capacitor from v_fire back below the
// threshold, deasserting the trigger.
inline double retention_check(const TriggerParams& p, double v_fire) {
    if (v_fire < p.v_threshold)
        throw SimError("retention_check: v_fire below threshold");
    return p.leak_tau_ns * std::log(v_fire / p.v_threshold);
}

// Steady-state capacitor voltage under one charge event every period_ns with
// leakage acting in between. Fixed point of v -> decay(v) + alpha*(vdd - decay(v)).
inline double steady_toggle_voltage(const TriggerParams& p, double period_ns) {
    const double a = p.alpha();
    const double d = std::exp(-period_ns / p.leak_tau_ns);
    return a * p.vdd_volts / (1.0 - (1.0 - a) * d);
}

// -------------------------------------------------------------------------
// Default calibration. Clock 10 ns; the threshold is reached on the 77th
// toggle, so a victim toggling every cycle trips the detector 770 ns after
// the first toggle. The leakage constant is solved so that the decay from
// the sustained-toggling steady state back to the threshold takes 30 us.
// -------------------------------------------------------------------------

inline constexpr TimeNs kDefaultClockPeriodNs = 10;

inline double solve_leak_tau(double c_unit, double c_main, double c_new, double vdd,
                             double v_threshold, double retention_target_ns,
                             double toggle_period_ns) {
    TriggerParams p;
    p.c_unit = c_unit;
    p.c_main = c_main;
    p.c_new = c_new;
    p.vdd_volts = vdd;
    p.v_threshold = v_threshold;
    double tau = retention_target_ns / std::log(vdd / v_threshold);
    for (int i = 0; i < 64; ++i) {
        p.leak_tau_ns = tau;
        const double vs = steady_toggle_voltage(p, toggle_period_ns);
        tau = retention_target_ns / std::log(vs / v_threshold);
    }
    return tau;
}

inline TriggerParams default_trigger_params() {
    TriggerParams p;
    p.c_unit = 1.0;
    p.c_main = 47.0;
    p.c_new = 0.0;
    p.vdd_volts = 1.0;
    p.v_threshold = 0.8;
    p.retention_ns = 30000.0;
    p.leak_tau_ns = solve_leak_tau(p.c_unit, p.c_main, p.c_new, p.vdd_volts, p.v_threshold,
                                   p.retention_ns, static_cast<double>(kDefaultClockPeriodNs));
    return p;
}

// Fortified variant: the supply-controlled device adds a parallel capacitance
// equal to the main one, so each supply drop halves the stored voltage and
// accumulation itself is slowed.
inline TriggerParams fortified_trigger_params() {
    TriggerParams p = default_trigger_params();
    p.c_new = p.c_main;
    return p;
}

// -------------------------------------------------------------------------
// Live trigger state
// -------------------------------------------------------------------------

struct TriggerState {
    double v_cap = 0.0;
    LogicValue last_victim_value = LogicValue::X;
    bool fired = false;
    bool last_vdd_on = true;
    TimeNs last_update_ns = 0;
};

struct AhtInstance {
    TriggerParams params;
    TriggerState state;
    std::uint32_t victim_net = 0;
    std::uint32_t payload_net = 0;
    PayloadKind payload_kind = PayloadKind::XorFlip;
};

// Advance one instance to now_ns. Applies, in order: leakage over the elapsed
// interval, the one-shot redistribution if the supply dropped since the last
// step, and a charge-share event if the victim made a concrete-to-concrete
// transition while powered. Returns the event time when `fired` rises.
inline std::optional<TimeNs> trigger_step(AhtInstance& inst, LogicValue victim_now,
                                          bool vdd_on, TimeNs now_ns) {
    TriggerState& st = inst.state;
    const TriggerParams& p = inst.params;
    if (now_ns < st.last_update_ns)
        throw SimError("trigger_step: time going backwards");

    const double dt = static_cast<double>(now_ns - st.last_update_ns);
    st.v_cap = leakage_decay(p, st.v_cap, dt);

    if (st.last_vdd_on && !vdd_on && p.c_new > 0.0)
        st.v_cap = off_redistribute(p, st.v_cap);

    const bool toggled = is_concrete(victim_now) && is_concrete(st.last_victim_value)
                         && victim_now != st.last_victim_value;
    if (toggled && vdd_on) st.v_cap += charge_share_delta(p, st.v_cap);

    if (st.v_cap < 0.0) st.v_cap = 0.0;
    if (st.v_cap > p.vdd_volts) st.v_cap = p.vdd_volts;

    const bool fired_now = (st.v_cap >= p.v_threshold)
                           && (vdd_on || !p.detector_gated_by_vdd);
    std::optional<TimeNs> event;
    if (fired_now && !st.fired) event = now_ns;
    st.fired = fired_now;
    st.last_victim_value = victim_now;
    st.last_vdd_on = vdd_on;
    st.last_update_ns = now_ns;
    return event;
}

} // namespace demist
