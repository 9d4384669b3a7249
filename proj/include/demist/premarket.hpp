#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "demist/errors.hpp"
#include "demist/netlist.hpp"
#include "demist/sim.hpp"
#include "demist/vddctl.hpp"

namespace demist {

// -------------------------------------------------------------------------
// Power profile and spike detection
// -------------------------------------------------------------------------

struct PowerProfile {
    std::vector<std::uint64_t> per_cycle_toggles;
    std::size_t baseline_start = 0;
    std::size_t baseline_len = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

inline PowerProfile power_profile(const Trace& t, std::size_t baseline_start = 10,
                                  std::size_t baseline_len = 200) {
    if (t.toggles_per_cycle.empty()) throw ConfigError("trace covers no cycles");
    PowerProfile p;
    p.per_cycle_toggles = t.toggles_per_cycle;
    const std::size_t n = p.per_cycle_toggles.size();
    if (baseline_start >= n) baseline_start = 0;
    p.baseline_start = baseline_start;
    p.baseline_len = std::min(baseline_len, n - baseline_start);
    double sum = 0.0, sq = 0.0;
    for (std::size_t c = p.baseline_start; c < p.baseline_start + p.baseline_len; ++c) {
        const double x = static_cast<double>(p.per_cycle_toggles[c]);
        sum += x;
        sq += x * x;
    }
    if (p.baseline_len > 0) {
        p.mean = sum / static_cast<double>(p.baseline_len);
        const double var = sq / static_cast<double>(p.baseline_len) - p.mean * p.mean;
        p.stddev = var > 0.0 ? std::sqrt(var) : 0.0;
    }
    return p;
}

struct CalibrationConfig {
    double coarse_step = 0.10;
    double fine_step = 0.05;
    double min_duty = 0.50;
    double spike_factor = 6.0;
    Stimulus vectors;
    TimeNs sched_period_ns = 1000;
    TimeNs sched_phase_ns = 0;
    std::size_t baseline_start = 10;
    std::size_t baseline_len = 200;
    double horizon_multiplier = 10.0; // sizing guide for the stimulus, in trigger times

    void validate() const {
        if (!(fine_step > 0.0) || fine_step > coarse_step || coarse_step >= 1.0)
            throw ConfigError("require 0 < fine_step <= coarse_step < 1");
        if (!(min_duty > 0.0) || min_duty >= 1.0) throw ConfigError("min_duty must be in (0, 1)");
        if (spike_factor < 0.0) throw ConfigError("spike_factor must be >= 0");
        if (sched_period_ns <= 0) throw ConfigError("schedule period must be positive");
        if (sched_phase_ns < 0) throw ConfigError("schedule phase must be >= 0");
        if (horizon_multiplier < 1.0) throw ConfigError("horizon multiplier must be >= 1");
    }
};

struct SpikeReport {
    std::vector<std::uint64_t> flagged_cycles;
    double threshold = 0.0; // additive margin over the reference level
    bool clear() const { return flagged_cycles.empty(); }
};

// Golden-free mode flags cycles whose activity exceeds the profile's own
// baseline by spike_factor standard deviations. With a golden profile the
// comparison is paired per cycle, and the deviation is measured on the
// paired difference over the baseline window — identical pre-trigger runs
// therefore give a zero margin, and any extra switching flags.
inline SpikeReport detect_spike(const PowerProfile& p, const CalibrationConfig& cfg,
                                const PowerProfile* golden = nullptr) {
    if (p.per_cycle_toggles.empty()) throw ConfigError("power profile is empty");
    if (p.baseline_len < 10) throw ConfigError("baseline window shorter than 10 cycles");
    SpikeReport r;
    // Cycles before the baseline window carry the reset transient; skip them.
    if (!golden) {
        r.threshold = p.mean + cfg.spike_factor * p.stddev;
        for (std::size_t c = p.baseline_start; c < p.per_cycle_toggles.size(); ++c)
            if (static_cast<double>(p.per_cycle_toggles[c]) > r.threshold)
                r.flagged_cycles.push_back(c);
        return r;
    }
    const std::size_t n = std::min(p.per_cycle_toggles.size(), golden->per_cycle_toggles.size());
    double sum = 0.0, sq = 0.0;
    std::size_t win = 0;
    for (std::size_t c = p.baseline_start; c < p.baseline_start + p.baseline_len && c < n; ++c) {
        const double d = static_cast<double>(p.per_cycle_toggles[c])
                         - static_cast<double>(golden->per_cycle_toggles[c]);
        sum += d;
        sq += d * d;
        ++win;
    }
    if (win < 10) throw ConfigError("baseline window shorter than 10 cycles");
    const double mean_d = sum / static_cast<double>(win);
    const double var = sq / static_cast<double>(win) - mean_d * mean_d;
    const double sd = var > 0.0 ? std::sqrt(var) : 0.0;
    r.threshold = cfg.spike_factor * sd;
    for (std::size_t c = p.baseline_start; c < n; ++c) {
        const double inst = static_cast<double>(p.per_cycle_toggles[c]);
        const double gold = static_cast<double>(golden->per_cycle_toggles[c]);
        if (inst > gold + r.threshold && inst > gold) r.flagged_cycles.push_back(c);
    }
    return r;
}

// -------------------------------------------------------------------------
// Functional test
// -------------------------------------------------------------------------

struct FunctionalResult {
    bool pass = false;
    std::optional<std::uint64_t> mismatch_cycle; // boundary cycle of the first mismatch
    std::string mismatch_net;
    bool spike_flagged = false;
    std::vector<std::uint64_t> flagged_cycles;
    TimeNs first_fail_ns = -1;
};

namespace detail {

inline void check_same_interface(const Netlist& a, const Netlist& b) {
    auto names = [](const Netlist& n, const std::vector<std::uint32_t>& ids) {
        std::vector<std::string> out;
        for (const auto id : ids) out.push_back(n.net_name(id));
        return out;
    };
    if (names(a, a.inputs()) != names(b, b.inputs()))
        throw ConfigError("netlist interfaces differ: primary inputs");
    auto saved_names = [](const Netlist& n) {
        std::vector<std::string> out;
        for (const auto id : n.saved_nets()) out.push_back(n.net_name(id));
        return out;
    };
    if (saved_names(a) != saved_names(b))
        throw ConfigError("netlist interfaces differ: saved outputs");
}

} // namespace detail

// Run the device under test at the given duty cycle and hold its saved
// outputs against a full-duty golden run, stall-aligned; a power spike in
// the DUT's own profile also fails the test.
inline FunctionalResult functional_test(const Netlist& instrumented, const Netlist& golden,
                                        const Stimulus& s, const VddSchedule& sched,
                                        const CalibrationConfig& cfg) {
    detail::check_same_interface(instrumented, golden);
    validate_stimulus(instrumented, s);
    const TimeNs T = s.clock_period_ns;

    const TimeNs dut_h = horizon_for_powered_cycles(sched, T, s.vectors.size());
    const auto dut_sched = schedule_from_duty(sched.period_ns, sched.duty, sched.phase_ns, dut_h);
    Trace dut = run(instrumented, s, uniform_schedules(dut_sched),
                    make_aht_instances(instrumented), dut_h);

    const TimeNs gold_h = static_cast<TimeNs>(s.vectors.size()) * T;
    Trace gold = run(golden, s, uniform_schedules(always_on(gold_h)),
                     make_aht_instances(golden), gold_h);

    FunctionalResult res;
    const std::size_t rows = std::min(dut.logical_outputs.size(), gold.logical_outputs.size());
    for (std::size_t j = 0; j < rows && !res.mismatch_cycle; ++j) {
        for (std::size_t c = 0; c < dut.saved_net_names.size(); ++c) {
            if (dut.logical_outputs[j][c] != gold.logical_outputs[j][c]) {
                res.mismatch_cycle = dut.logical_latch_cycle[j];
                res.mismatch_net = dut.saved_net_names[c];
                res.first_fail_ns = static_cast<TimeNs>(dut.logical_latch_cycle[j]) * T;
                break;
            }
        }
    }

    const auto profile = power_profile(dut, cfg.baseline_start, cfg.baseline_len);
    const auto spike = detect_spike(profile, cfg);
    res.spike_flagged = !spike.clear();
    res.flagged_cycles = spike.flagged_cycles;
    if (res.spike_flagged && res.first_fail_ns < 0 && !res.flagged_cycles.empty())
        res.first_fail_ns = static_cast<TimeNs>(res.flagged_cycles.front()) * T;
    res.pass = !res.mismatch_cycle && !res.spike_flagged;
    return res;
}

// -------------------------------------------------------------------------
// Calibration protocol
// -------------------------------------------------------------------------

enum class Verdict : std::uint8_t { Clean, TrojanMitigated, Unusable };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Clean: return "CLEAN";
        case Verdict::TrojanMitigated: return "TROJAN_MITIGATED";
        default: return "UNUSABLE";
    }
}

struct EvidenceRow {
    double duty = 1.0;
    bool pass = false;
    std::optional<std::uint64_t> mismatch_cycle;
    bool spike = false;
    TimeNs first_fail_ns = -1;
};

struct CalibrationReport {
    Verdict verdict = Verdict::Unusable;
    std::optional<double> chosen_duty;
    double performance_penalty = 1.0;
    std::vector<EvidenceRow> evidence; // in test order
};

inline double performance_penalty(double duty) {
    if (!(duty > 0.0) || duty > 1.0) throw ConfigError("duty must be in (0, 1]");
    return 1.0 - duty;
}

namespace detail {

// Snap accumulated floating-point step error so tested duties sit exactly
// on the nominal grid.
inline double snap_duty(double d) { return std::round(d * 1e9) / 1e9; }

} // namespace detail

// The pre-market decision procedure: full-duty test first, then a coarse
// descending sweep, then a fine ascending refinement from the first passing
// duty, with a hard floor below which the part is scrapped.
inline CalibrationReport calibrate(const Netlist& instrumented, const Netlist& golden,
                                   const CalibrationConfig& cfg) {
    cfg.validate();
    CalibrationReport rep;
    auto test = [&](double duty) {
        const auto sched = schedule_from_duty(cfg.sched_period_ns, duty, cfg.sched_phase_ns, 0);
        const auto res = functional_test(instrumented, golden, cfg.vectors, sched, cfg);
        rep.evidence.push_back(
            {duty, res.pass, res.mismatch_cycle, res.spike_flagged, res.first_fail_ns});
        return res.pass;
    };

    if (test(1.0)) {
        rep.verdict = Verdict::Clean;
        rep.chosen_duty = 1.0;
        rep.performance_penalty = 0.0;
        return rep;
    }

    std::optional<double> coarse_pass;
    for (double d = detail::snap_duty(1.0 - cfg.coarse_step); d >= cfg.min_duty - 1e-9;
         d = detail::snap_duty(d - cfg.coarse_step)) {
        if (test(d)) {
            coarse_pass = d;
            break;
        }
    }
    if (!coarse_pass) {
        rep.verdict = Verdict::Unusable;
        rep.performance_penalty = 1.0;
        return rep;
    }

    double chosen = *coarse_pass;
    for (double d = detail::snap_duty(chosen + cfg.fine_step); d < 1.0 - 1e-9;
         d = detail::snap_duty(d + cfg.fine_step)) {
        if (!test(d)) break;
        chosen = d;
    }
    rep.verdict = Verdict::TrojanMitigated;
    rep.chosen_duty = chosen;
    rep.performance_penalty = performance_penalty(chosen);
    return rep;
}

} // namespace demist
