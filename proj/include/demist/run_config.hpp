#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "demist/aht.hpp"
#include "demist/errors.hpp"
#include "demist/netlist.hpp"
#include "demist/premarket.hpp"
#include "demist/sim.hpp"
#include "demist/trace_io.hpp"
#include "demist/vddctl.hpp"

namespace demist {

inline constexpr const char* kRunSchema = "demist-run-v1";

struct StimulusSpec {
    std::string kind = "mixed"; // random | directed | mixed
    std::uint64_t seed = 1;
    std::size_t count = 200;          // random vectors
    std::size_t directed_count = 800; // directed toggle vectors
    std::optional<std::string> toggle_input;
    TimeNs clock_period_ns = kDefaultClockPeriodNs;
};

struct AhtSpec {
    std::string victim;
    std::string payload;
    PayloadKind kind = PayloadKind::XorFlip;
    TriggerParams params = default_trigger_params();
};

struct RunConfig {
    std::filesystem::path netlist_path;
    std::optional<std::vector<std::string>> wrap_nets; // empty vector = all outputs
    std::optional<AhtSpec> aht;
    StimulusSpec stimulus;
    TimeNs sched_period_ns = 1000;
    double duty = 1.0;
    TimeNs sched_phase_ns = 0;
    std::optional<TimeNs> horizon_ns; // default: consume every vector
    std::vector<std::string> record_nets;
    bool record_all = false;
    InitPolicy init = InitPolicy::AllZero;
    CalibrationConfig calibration;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const char* where,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be a JSON object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const auto* a : allowed)
            if (key == a) { ok = true; break; }
        if (!ok) throw ConfigError(std::string("unknown key '") + key + "' in " + where);
    }
}

inline TriggerParams trigger_params_from_json(const nlohmann::json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "default") return default_trigger_params();
        if (s == "fortified") return fortified_trigger_params();
        throw ConfigError("trigger params preset must be 'default' or 'fortified'");
    }
    check_keys(j, "aht.params",
               {"base", "c_unit", "c_main", "c_new", "vdd_volts", "v_threshold", "retention_ns",
                "leak_tau_ns", "detector_gated_by_vdd"});
    TriggerParams p = default_trigger_params();
    if (j.contains("base")) p = trigger_params_from_json(j.at("base"));
    if (j.contains("c_unit")) p.c_unit = j.at("c_unit").get<double>();
    if (j.contains("c_main")) p.c_main = j.at("c_main").get<double>();
    if (j.contains("c_new")) p.c_new = j.at("c_new").get<double>();
    if (j.contains("vdd_volts")) p.vdd_volts = j.at("vdd_volts").get<double>();
    if (j.contains("v_threshold")) p.v_threshold = j.at("v_threshold").get<double>();
    if (j.contains("retention_ns")) p.retention_ns = j.at("retention_ns").get<double>();
    if (j.contains("leak_tau_ns")) p.leak_tau_ns = j.at("leak_tau_ns").get<double>();
    if (j.contains("detector_gated_by_vdd"))
        p.detector_gated_by_vdd = j.at("detector_gated_by_vdd").get<bool>();
    p.validate();
    return p;
}

} // namespace detail

inline RunConfig run_config_from_json(const nlohmann::json& j,
                                      const std::filesystem::path& base_dir = {}) {
    if (!j.is_object() || !j.contains("schema"))
        throw ConfigError("run config missing 'schema'");
    if (j.at("schema") != kRunSchema)
        throw ConfigError("unsupported run config schema (expected " + std::string(kRunSchema)
                          + ")");
    detail::check_keys(j, "run config",
                       {"schema", "netlist", "wrap_outputs", "aht", "stimulus", "schedule",
                        "horizon_ns", "record", "init", "calibration"});
    RunConfig cfg;
    if (!j.contains("netlist")) throw ConfigError("run config missing 'netlist'");
    std::filesystem::path p = j.at("netlist").get<std::string>();
    cfg.netlist_path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;

    if (j.contains("wrap_outputs")) {
        const auto& w = j.at("wrap_outputs");
        if (w.is_boolean()) {
            if (w.get<bool>()) cfg.wrap_nets = std::vector<std::string>{};
        } else {
            cfg.wrap_nets = w.get<std::vector<std::string>>();
        }
    }
    if (j.contains("aht")) {
        const auto& a = j.at("aht");
        detail::check_keys(a, "aht", {"victim", "payload", "kind", "params"});
        AhtSpec spec;
        if (!a.contains("victim") || !a.contains("payload"))
            throw ConfigError("aht needs 'victim' and 'payload'");
        spec.victim = a.at("victim").get<std::string>();
        spec.payload = a.at("payload").get<std::string>();
        if (a.contains("kind")) {
            const auto k = payload_kind_from_string(a.at("kind").get<std::string>());
            if (!k) throw ConfigError("unknown payload kind '" + a.at("kind").get<std::string>() + "'");
            spec.kind = *k;
        }
        if (a.contains("params")) spec.params = detail::trigger_params_from_json(a.at("params"));
        cfg.aht = spec;
    }
    if (j.contains("stimulus")) {
        const auto& s = j.at("stimulus");
        detail::check_keys(s, "stimulus",
                           {"kind", "seed", "count", "directed_count", "toggle_input",
                            "clock_period_ns"});
        if (s.contains("kind")) cfg.stimulus.kind = s.at("kind").get<std::string>();
        if (cfg.stimulus.kind != "random" && cfg.stimulus.kind != "directed"
            && cfg.stimulus.kind != "mixed")
            throw ConfigError("stimulus kind must be random, directed, or mixed");
        if (s.contains("seed")) cfg.stimulus.seed = s.at("seed").get<std::uint64_t>();
        if (s.contains("count")) cfg.stimulus.count = s.at("count").get<std::size_t>();
        if (s.contains("directed_count"))
            cfg.stimulus.directed_count = s.at("directed_count").get<std::size_t>();
        if (s.contains("toggle_input"))
            cfg.stimulus.toggle_input = s.at("toggle_input").get<std::string>();
        if (s.contains("clock_period_ns"))
            cfg.stimulus.clock_period_ns = s.at("clock_period_ns").get<TimeNs>();
    }
    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        detail::check_keys(s, "schedule", {"period_ns", "duty", "phase_ns"});
        if (s.contains("period_ns")) cfg.sched_period_ns = s.at("period_ns").get<TimeNs>();
        if (s.contains("duty")) cfg.duty = s.at("duty").get<double>();
        if (s.contains("phase_ns")) cfg.sched_phase_ns = s.at("phase_ns").get<TimeNs>();
    }
    if (j.contains("horizon_ns")) cfg.horizon_ns = j.at("horizon_ns").get<TimeNs>();
    if (j.contains("record")) {
        const auto& r = j.at("record");
        if (r.is_string()) {
            if (r.get<std::string>() != "all")
                throw ConfigError("record must be \"all\" or a list of net names");
            cfg.record_all = true;
        } else {
            cfg.record_nets = r.get<std::vector<std::string>>();
        }
    }
    if (j.contains("init")) {
        const auto s = j.at("init").get<std::string>();
        if (s == "all_zero") cfg.init = InitPolicy::AllZero;
        else if (s == "all_x") cfg.init = InitPolicy::AllX;
        else throw ConfigError("init must be all_zero or all_x");
    }
    if (j.contains("calibration")) {
        const auto& c = j.at("calibration");
        detail::check_keys(c, "calibration",
                           {"coarse_step", "fine_step", "min_duty", "spike_factor",
                            "sched_period_ns", "baseline_start", "baseline_len",
                            "horizon_multiplier"});
        auto& cal = cfg.calibration;
        if (c.contains("coarse_step")) cal.coarse_step = c.at("coarse_step").get<double>();
        if (c.contains("fine_step")) cal.fine_step = c.at("fine_step").get<double>();
        if (c.contains("min_duty")) cal.min_duty = c.at("min_duty").get<double>();
        if (c.contains("spike_factor")) cal.spike_factor = c.at("spike_factor").get<double>();
        if (c.contains("sched_period_ns"))
            cal.sched_period_ns = c.at("sched_period_ns").get<TimeNs>();
        if (c.contains("baseline_start"))
            cal.baseline_start = c.at("baseline_start").get<std::size_t>();
        if (c.contains("baseline_len")) cal.baseline_len = c.at("baseline_len").get<std::size_t>();
        if (c.contains("horizon_multiplier"))
            cal.horizon_multiplier = c.at("horizon_multiplier").get<double>();
        cal.validate();
    }
    return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path.string()));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad JSON in '" + path.string() + "': " + e.what());
    }
    return run_config_from_json(j, path.parent_path());
}

// Netlist with the config's rewrites applied: wrap first, then attach the
// trigger (so a payload may target the renamed raw copy of a wrapped net).
inline Netlist realize_netlist(const RunConfig& cfg) {
    Netlist n = parse_bench(read_text_file(cfg.netlist_path.string()),
                            cfg.netlist_path.stem().string());
    if (cfg.wrap_nets) {
        std::vector<std::string> nets = *cfg.wrap_nets;
        if (nets.empty())
            for (const auto id : n.outputs()) nets.push_back(n.net_name(id));
        n = wrap_state_saving(n, nets);
    }
    if (cfg.aht) {
        AhtAttachment att;
        att.params = cfg.aht->params;
        att.victim = cfg.aht->victim;
        att.payload = cfg.aht->payload;
        att.payload_kind = cfg.aht->kind;
        n = inject_aht(n, std::move(att));
    }
    return n;
}

// Golden twin: same wrap, no trigger attachments (including any carried by
// pragmas in the bench source).
inline Netlist realize_golden(const RunConfig& cfg) {
    Netlist n = parse_bench(read_text_file(cfg.netlist_path.string()),
                            cfg.netlist_path.stem().string());
    NetlistData d = n.to_data();
    d.ahts.clear();
    n = Netlist(std::move(d));
    if (cfg.wrap_nets) {
        std::vector<std::string> nets = *cfg.wrap_nets;
        if (nets.empty())
            for (const auto id : n.outputs()) nets.push_back(n.net_name(id));
        n = wrap_state_saving(n, nets);
    }
    return n;
}

inline Stimulus realize_stimulus(const RunConfig& cfg, const Netlist& n) {
    const auto& sp = cfg.stimulus;
    auto toggle_index = [&]() -> std::size_t {
        if (sp.toggle_input) {
            const auto id = n.net_id(*sp.toggle_input);
            if (!n.is_primary_input(id))
                throw ConfigError("toggle_input '" + *sp.toggle_input + "' is not a primary input");
            const auto& ins = n.inputs();
            return static_cast<std::size_t>(std::find(ins.begin(), ins.end(), id) - ins.begin());
        }
        // Fall back to an inverter/buffer chain reaching the victim.
        for (const auto& a : n.ahts())
            if (const auto idx = find_toggle_input(n, a.victim)) return *idx;
        throw ConfigError("directed stimulus needs toggle_input or a chain-reachable victim");
    };
    if (sp.kind == "random") return random_stimulus(n, sp.count, sp.seed, sp.clock_period_ns);
    if (sp.kind == "directed")
        return directed_toggle_stimulus(n, sp.directed_count, toggle_index(), sp.clock_period_ns);
    return concat_stimulus(
        random_stimulus(n, sp.count, sp.seed, sp.clock_period_ns),
        directed_toggle_stimulus(n, sp.directed_count, toggle_index(), sp.clock_period_ns));
}

} // namespace demist
