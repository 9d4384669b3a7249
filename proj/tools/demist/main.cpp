// demist — workbench driver for trigger-capacitance trojan studies:
// netlist inspection, duty-cycled simulation, trigger injection, pre-market
// calibration, and area overhead reporting.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "demist/errors.hpp"
#include "demist/netlist.hpp"
#include "demist/overhead.hpp"
#include "demist/premarket.hpp"
#include "demist/run_config.hpp"
#include "demist/sim.hpp"
#include "demist/trace_io.hpp"
#include "demist/vddctl.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> duty;
    std::optional<demist::TimeNs> period_ns;
    std::optional<demist::TimeNs> horizon_ns;
    std::optional<std::string> victim;
    std::optional<std::string> payload;
    bool fortified = false;
    std::optional<double> min_duty;
    std::optional<double> coarse_step;
    std::optional<double> fine_step;
};

void add_override_flags(CLI::App* cmd, Overrides& ov) {
    cmd->add_option("--seed", ov.seed, "Override the stimulus seed");
    cmd->add_option("--duty", ov.duty, "Override the disruptive-zone duty cycle");
    cmd->add_option("--period-ns", ov.period_ns, "Override the schedule period");
    cmd->add_option("--horizon-ns", ov.horizon_ns, "Override the simulated horizon");
    cmd->add_option("--victim", ov.victim, "Override the trigger's victim net");
    cmd->add_option("--payload", ov.payload, "Override the trigger's payload net");
    cmd->add_flag("--fortified", ov.fortified,
                  "Add the parallel evasion capacitance (c_new = c_main)");
    cmd->add_option("--min-duty", ov.min_duty, "Override the calibration duty floor");
    cmd->add_option("--coarse-step", ov.coarse_step, "Override the coarse sweep step");
    cmd->add_option("--fine-step", ov.fine_step, "Override the fine refinement step");
}

void apply_overrides(demist::RunConfig& cfg, const Overrides& ov) {
    if (ov.seed) cfg.stimulus.seed = *ov.seed;
    if (ov.duty) cfg.duty = *ov.duty;
    if (ov.period_ns) {
        cfg.sched_period_ns = *ov.period_ns;
        cfg.calibration.sched_period_ns = *ov.period_ns;
    }
    if (ov.horizon_ns) cfg.horizon_ns = *ov.horizon_ns;
    if (ov.victim || ov.payload || ov.fortified) {
        if (!cfg.aht) cfg.aht = demist::AhtSpec{};
        if (ov.victim) cfg.aht->victim = *ov.victim;
        if (ov.payload) cfg.aht->payload = *ov.payload;
        if (ov.fortified) cfg.aht->params.c_new = cfg.aht->params.c_main;
    }
    if (ov.min_duty) cfg.calibration.min_duty = *ov.min_duty;
    if (ov.coarse_step) cfg.calibration.coarse_step = *ov.coarse_step;
    if (ov.fine_step) cfg.calibration.fine_step = *ov.fine_step;
}

int cmd_parse(const std::string& path, const std::string& canonical_out) {
    const auto n = demist::parse_bench(demist::read_text_file(path), fs::path(path).stem().string());
    const auto st = n.stats();
    std::cout << "netlist:  " << n.name() << "\n"
              << "inputs:   " << st.input_count << "\n"
              << "outputs:  " << st.output_count << "\n"
              << "gates:    " << st.gate_count << " (" << st.dff_count << " flip-flops)\n"
              << "nets:     " << st.net_count << "\n";
    for (const auto& w : n.warnings()) std::cout << "warning:  " << w << "\n";
    if (!canonical_out.empty()) demist::write_text_file(canonical_out, n.to_bench());
    return 0;
}

demist::VddSchedule config_schedule(const demist::RunConfig& cfg, demist::TimeNs horizon) {
    return demist::schedule_from_duty(cfg.sched_period_ns, cfg.duty, cfg.sched_phase_ns, horizon);
}

demist::TimeNs resolve_horizon(const demist::RunConfig& cfg, const demist::Stimulus& s) {
    if (cfg.horizon_ns) return *cfg.horizon_ns;
    const auto probe =
        demist::schedule_from_duty(cfg.sched_period_ns, cfg.duty, cfg.sched_phase_ns, 0);
    return demist::horizon_for_powered_cycles(probe, s.clock_period_ns, s.vectors.size());
}

int cmd_simulate(const std::string& cfg_path, const std::string& outdir, const Overrides& ov) {
    auto cfg = demist::load_run_config(cfg_path);
    apply_overrides(cfg, ov);
    const auto n = demist::realize_netlist(cfg);
    const auto stim = demist::realize_stimulus(cfg, n);
    const auto horizon = resolve_horizon(cfg, stim);
    const auto sched = config_schedule(cfg, horizon);

    demist::RunOptions opts;
    opts.init = cfg.init;
    opts.record_nets = cfg.record_nets;
    opts.record_all_nets = cfg.record_all;
    const auto trace = demist::run(n, stim, demist::uniform_schedules(sched),
                                   demist::make_aht_instances(n), horizon, opts);

    fs::create_directories(outdir);
    demist::write_text_file((fs::path(outdir) / "trace.json").string(),
                            demist::trace_to_json(trace).dump(2) + "\n");
    std::ostringstream csv, vcd;
    demist::write_csv(csv, trace);
    demist::write_vcd(vcd, trace, n.name());
    demist::write_text_file((fs::path(outdir) / "trace.csv").string(), csv.str());
    demist::write_text_file((fs::path(outdir) / "trace.vcd").string(), vcd.str());

    std::cout << "simulated " << trace.horizon_ns << " ns (" << trace.toggles_per_cycle.size()
              << " cycles, " << trace.stall_cycles << " stalled)\n";
    for (const auto& e : trace.trigger_events)
        std::cout << "trigger event: aht " << e.aht_index << " at " << e.time_ns << " ns\n";
    if (trace.trigger_events.empty()) std::cout << "no trigger events\n";
    return 0;
}

int cmd_inject(const std::string& cfg_path, const std::string& out_path, const Overrides& ov) {
    auto cfg = demist::load_run_config(cfg_path);
    apply_overrides(cfg, ov);
    if (!cfg.aht) throw demist::ConfigError("inject needs an aht section or --victim/--payload");
    const auto n = demist::realize_netlist(cfg);
    demist::write_text_file(out_path, n.to_bench());
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

ordered_json report_to_json(const demist::CalibrationReport& rep,
                            const std::optional<double>& critical) {
    ordered_json j;
    j["schema"] = "demist-calibration-v1";
    j["verdict"] = demist::verdict_name(rep.verdict);
    if (rep.chosen_duty) j["chosen_duty"] = *rep.chosen_duty;
    else j["chosen_duty"] = nullptr;
    j["performance_penalty"] = rep.performance_penalty;
    if (critical) j["critical_duty"] = *critical;
    ordered_json rows = ordered_json::array();
    for (const auto& e : rep.evidence) {
        ordered_json r;
        r["duty"] = e.duty;
        r["pass"] = e.pass;
        if (e.mismatch_cycle) r["mismatch_cycle"] = *e.mismatch_cycle;
        r["spike"] = e.spike;
        if (e.first_fail_ns >= 0) r["first_fail_ns"] = e.first_fail_ns;
        rows.push_back(r);
    }
    j["evidence"] = rows;
    return j;
}

std::string report_to_text(const demist::CalibrationReport& rep,
                           const std::optional<double>& critical) {
    std::ostringstream os;
    os << "verdict:             " << demist::verdict_name(rep.verdict) << "\n";
    os << "chosen duty:         ";
    if (rep.chosen_duty) os << *rep.chosen_duty;
    else os << "-";
    os << "\nperformance penalty: " << rep.performance_penalty << "\n";
    if (critical) os << "critical duty:       " << *critical << "\n";
    os << "\n  duty   result  spike  first-fail\n";
    for (const auto& e : rep.evidence) {
        char line[80];
        std::snprintf(line, sizeof(line), "  %.2f   %-6s  %-5s  ", e.duty,
                      e.pass ? "pass" : "fail", e.spike ? "yes" : "no");
        os << line;
        if (e.first_fail_ns >= 0) os << e.first_fail_ns << " ns";
        else os << "-";
        os << "\n";
    }
    return os.str();
}

int cmd_calibrate(const std::string& cfg_path, const std::string& outdir, const Overrides& ov) {
    auto cfg = demist::load_run_config(cfg_path);
    apply_overrides(cfg, ov);
    const auto instrumented = demist::realize_netlist(cfg);
    const auto golden = demist::realize_golden(cfg);
    auto cal = cfg.calibration;
    cal.vectors = demist::realize_stimulus(cfg, instrumented);
    const auto rep = demist::calibrate(instrumented, golden, cal);

    std::optional<double> critical;
    std::string curve = "duty,max_v_cap,fires\n";
    if (!instrumented.ahts().empty()) {
        const auto& p = instrumented.ahts().front().params;
        const auto T = cal.vectors.clock_period_ns;
        critical = demist::critical_duty(p, T, cal.sched_period_ns, 0.01);
        const long k_full = demist::toggles_to_trigger(p, 0.0);
        if (k_full != demist::kNeverTriggers) {
            const demist::TimeNs horizon = 10 * static_cast<demist::TimeNs>(k_full) * T;
            for (int pct = 50; pct <= 100; pct += 5) {
                const double duty = pct / 100.0;
                const auto sched =
                    demist::schedule_from_duty(cal.sched_period_ns, duty, 0, horizon);
                const double mv = demist::max_toggle_voltage(p, sched, T);
                curve += demist::detail::short_double(duty);
                curve += ",";
                curve += demist::detail::short_double(mv);
                curve += mv >= p.v_threshold ? ",1\n" : ",0\n";
            }
        }
    }

    fs::create_directories(outdir);
    demist::write_text_file((fs::path(outdir) / "report.json").string(),
                            report_to_json(rep, critical).dump(2) + "\n");
    demist::write_text_file((fs::path(outdir) / "report.txt").string(),
                            report_to_text(rep, critical));
    demist::write_text_file((fs::path(outdir) / "duty_curve.csv").string(), curve);
    std::cout << report_to_text(rep, critical);
    return 0;
}

int cmd_overhead(const std::vector<std::string>& bench_paths,
                 const std::vector<double>& external, std::size_t mux2_cells,
                 std::size_t dff_cells, const std::string& json_out) {
    demist::CellAreaModel model;
    demist::MitigationCells cells{mux2_cells, dff_cells};
    ordered_json rows = ordered_json::array();
    std::ostringstream table;
    table << "benchmark      gates  dffs  area(l^2)    mitigation(l^2)  overhead(%)\n";
    if (!external.empty()) {
        const double pct = demist::overhead_percent(external[0], external[1]);
        char line[160];
        std::snprintf(line, sizeof(line), "%-13s  %5s  %4s  %-11g  %-15g  %.2f\n", "(external)",
                      "-", "-", external[1], external[0], pct);
        table << line;
        rows.push_back({{"benchmark", "(external)"},
                        {"benchmark_area", external[1]},
                        {"mitigation_area", external[0]},
                        {"overhead_percent", pct}});
    }
    for (const auto& path : bench_paths) {
        const auto n = demist::parse_bench(demist::read_text_file(path),
                                           fs::path(path).stem().string());
        const auto rep = demist::make_overhead_report(n, model, cells);
        char line[160];
        std::snprintf(line, sizeof(line), "%-13s  %5zu  %4zu  %-11g  %-15g  %.2f\n",
                      rep.benchmark_name.c_str(), rep.gate_count, rep.dff_count,
                      rep.benchmark_area_l2, rep.mitigation_area_l2, rep.overhead_pct);
        table << line;
        rows.push_back({{"benchmark", rep.benchmark_name},
                        {"gates", rep.gate_count},
                        {"dffs", rep.dff_count},
                        {"benchmark_area", rep.benchmark_area_l2},
                        {"mitigation_area", rep.mitigation_area_l2},
                        {"overhead_percent", rep.overhead_pct}});
    }
    table << "mux2 counted as 4 nand equivalents; combinational gates as 1 each\n";
    std::cout << table.str();
    if (!json_out.empty()) {
        ordered_json j;
        j["schema"] = "demist-overhead-v1";
        j["mitigation_cells"] = {{"mux2", cells.mux2}, {"dff", cells.dff}};
        j["rows"] = rows;
        demist::write_text_file(json_out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_export_vcd(const std::string& trace_path, const std::string& out_path) {
    const auto j = nlohmann::json::parse(demist::read_text_file(trace_path));
    const auto trace = demist::trace_from_json(j);
    std::ostringstream vcd;
    demist::write_vcd(vcd, trace);
    demist::write_text_file(out_path, vcd.str());
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trigger-capacitance trojan simulation workbench"};
    app.require_subcommand(1);

    std::string bench_path, cfg_path, out_path = ".", canonical_out;
    Overrides ov;

    auto* parse = app.add_subcommand("parse", "Parse a .bench netlist and print stats");
    parse->add_option("bench", bench_path, "netlist file")->required();
    parse->add_option("-o,--canonical", canonical_out, "write the canonical serialization here");

    auto* sim = app.add_subcommand("simulate", "Run a scenario and write trace files");
    sim->add_option("config", cfg_path, "run config JSON")->required();
    sim->add_option("-o,--outdir", out_path, "output directory (default .)");
    add_override_flags(sim, ov);

    std::string inject_out = "instrumented.bench";
    auto* inj = app.add_subcommand("inject", "Attach a trigger and write the instrumented bench");
    inj->add_option("config", cfg_path, "run config JSON")->required();
    inj->add_option("-o,--out", inject_out, "output bench path");
    add_override_flags(inj, ov);

    auto* cal = app.add_subcommand("calibrate", "Run the pre-market duty-cycle protocol");
    cal->add_option("config", cfg_path, "run config JSON")->required();
    cal->add_option("-o,--outdir", out_path, "output directory (default .)");
    add_override_flags(cal, ov);

    std::vector<std::string> bench_paths;
    std::vector<double> external;
    std::size_t mux2_cells = 2, dff_cells = 7;
    std::string json_out;
    auto* ovh = app.add_subcommand("overhead", "Area overhead for the mitigation cell set");
    ovh->add_option("bench", bench_paths, "netlist files");
    ovh->add_option("--areas", external, "externally supplied areas: MITIGATION BENCHMARK")
        ->expected(2);
    ovh->add_option("--mux2", mux2_cells, "mitigation mux2 count (default 2)");
    ovh->add_option("--dff", dff_cells, "mitigation dff count (default 7)");
    ovh->add_option("--json", json_out, "also write a JSON report here");

    std::string trace_path, vcd_out = "trace.vcd";
    auto* exp = app.add_subcommand("export-vcd", "Convert a trace.json to VCD");
    exp->add_option("trace", trace_path, "trace JSON file")->required();
    exp->add_option("-o,--out", vcd_out, "output VCD path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (parse->parsed()) return cmd_parse(bench_path, canonical_out);
        if (sim->parsed()) return cmd_simulate(cfg_path, out_path, ov);
        if (inj->parsed()) return cmd_inject(cfg_path, inject_out, ov);
        if (cal->parsed()) return cmd_calibrate(cfg_path, out_path, ov);
        if (ovh->parsed()) {
            if (bench_paths.empty() && external.empty())
                throw demist::ConfigError("overhead needs bench files or --areas");
            return cmd_overhead(bench_paths, external, mux2_cells, dff_cells, json_out);
        }
        if (exp->parsed()) return cmd_export_vcd(trace_path, vcd_out);
    } catch (const demist::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const demist::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const demist::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "unexpected error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
