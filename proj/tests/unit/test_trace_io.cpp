#include <cstdio>
#include <sstream>

#include "catch_amalgamated.hpp"
#include "demist/trace_io.hpp"
#include "support/oracles.hpp"

using namespace demist;

namespace {

Trace tiny_trace() {
    const auto O = LogicValue::Zero;
    const auto I = LogicValue::One;
    const auto X = LogicValue::X;
    Trace t;
    t.clock_period_ns = 10;
    t.horizon_ns = 20;
    t.recorded_nets = {"a", "y"};
    t.sample_times = {0, 10, 20};
    t.samples = {{O, I, X}, {I, I, O}};
    t.vdd_disruptive = {1, 1, 0};
    t.vdd_non_disruptive = {1, 1, 1};
    t.aht_voltage = {{0.0, 0.5, 0.25}};
    t.aht_fired = {{0, 0, 1}};
    t.trigger_events = {{20, 0}};
    t.toggles_per_cycle = {0, 3};
    t.sel_per_cycle = {1, 0};
    t.saved_net_names = {"y"};
    t.logical_outputs = {{O}, {I}};
    t.logical_latch_cycle = {0, 1};
    t.stall_cycles = 1;
    return t;
}

Trace chain_trace() {
    const Netlist base = parse_bench(R"(
INPUT(in0)
INPUT(in1)
OUTPUT(out)
inv1 = NOT(in0)
inv2 = NOT(inv1)
mid = AND(inv2, in1)
out = OR(mid, in0)
)");
    AhtAttachment at;
    at.params = default_trigger_params();
    at.victim = "inv2";
    at.payload = "mid";
    const Netlist n = inject_aht(base, at);
    const auto s = directed_toggle_stimulus(n, 200, 0);
    return run(n, s, uniform_schedules(always_on(1500)), make_aht_instances(n), 1500);
}

} // namespace

TEST_CASE("vcd identifier codes walk the printable range") {
    CHECK(detail::vcd_id(0) == "!");
    CHECK(detail::vcd_id(1) == "\"");
    CHECK(detail::vcd_id(93) == "~");
    CHECK(detail::vcd_id(94) == "!\"");
    CHECK(detail::vcd_id(94 * 94) == "!!\"");
}

TEST_CASE("short_double renders round-trippable compact numbers") {
    CHECK(detail::short_double(0.0) == "0");
    CHECK(detail::short_double(0.5) == "0.5");
    CHECK(detail::short_double(1.0) == "1");
    for (double v : {0.7646061878, 136545.177448, 1e-9, 3.0}) {
        CHECK(std::stod(detail::short_double(v)) == v);
    }
}

TEST_CASE("vcd writer emits a deterministic change dump") {
    const std::string expected =
        "$timescale 1ns $end\n"
        "$scope module top $end\n"
        "$var wire 1 ! VDD_disruptive $end\n"
        "$var wire 1 \" VDD_non_disruptive $end\n"
        "$var wire 1 # a $end\n"
        "$var wire 1 $ y $end\n"
        "$var real 64 % aht0_vcap $end\n"
        "$var wire 1 & aht0_fired $end\n"
        "$upscope $end\n"
        "$enddefinitions $end\n"
        "#0\n"
        "$dumpvars\n"
        "1!\n"
        "1\"\n"
        "0#\n"
        "1$\n"
        "r0 %\n"
        "0&\n"
        "$end\n"
        "#10\n"
        "1#\n"
        "r0.5 %\n"
        "#20\n"
        "0!\n"
        "x#\n"
        "0$\n"
        "r0.25 %\n"
        "1&\n";
    std::ostringstream os;
    write_vcd(os, tiny_trace());
    CHECK(os.str() == expected);

    std::ostringstream named;
    write_vcd(named, tiny_trace(), "dut");
    CHECK(named.str().find("$scope module dut $end") != std::string::npos);
}

TEST_CASE("csv writer emits one row per sample") {
    const std::string expected =
        "time_ns,vdd_disruptive,vdd_non_disruptive,a,y,aht0_vcap,aht0_fired\n"
        "0,1,1,0,1,0,0\n"
        "10,1,1,1,1,0.5,0\n"
        "20,0,1,x,0,0.25,1\n";
    std::ostringstream os;
    write_csv(os, tiny_trace());
    CHECK(os.str() == expected);
}

TEST_CASE("json round trip preserves every trace field") {
    const Trace t = tiny_trace();
    const auto j = trace_to_json(t);
    CHECK(j.at("schema") == "demist-trace-v1");
    const Trace r = trace_from_json(j);
    CHECK(r.clock_period_ns == t.clock_period_ns);
    CHECK(r.horizon_ns == t.horizon_ns);
    CHECK(r.sample_times == t.sample_times);
    CHECK(r.recorded_nets == t.recorded_nets);
    CHECK(r.samples == t.samples);
    CHECK(r.vdd_disruptive == t.vdd_disruptive);
    CHECK(r.vdd_non_disruptive == t.vdd_non_disruptive);
    CHECK(r.aht_voltage == t.aht_voltage);
    CHECK(r.aht_fired == t.aht_fired);
    REQUIRE(r.trigger_events.size() == 1);
    CHECK(r.trigger_events[0].time_ns == 20);
    CHECK(r.trigger_events[0].aht_index == 0);
    CHECK(r.toggles_per_cycle == t.toggles_per_cycle);
    CHECK(r.sel_per_cycle == t.sel_per_cycle);
    CHECK(r.saved_net_names == t.saved_net_names);
    CHECK(r.logical_outputs == t.logical_outputs);
    CHECK(r.logical_latch_cycle == t.logical_latch_cycle);
    CHECK(r.stall_cycles == t.stall_cycles);
    // serializing the reloaded trace reproduces the same document
    CHECK(trace_to_json(r).dump() == j.dump());
}

TEST_CASE("json loader rejects malformed documents") {
    CHECK_THROWS_AS(trace_from_json(nlohmann::json{{"schema", "other"}}), ConfigError);
    CHECK_THROWS_AS(trace_from_json(nlohmann::json::array()), ConfigError);

    auto bad_char = trace_to_json(tiny_trace());
    bad_char["values"][0] = "01z";
    CHECK_THROWS_AS(trace_from_json(bad_char), ConfigError);

    auto upper = trace_to_json(tiny_trace());
    upper["values"][0] = "01X"; // upper-case X accepted
    CHECK_NOTHROW(trace_from_json(upper));

    auto ragged = trace_to_json(tiny_trace());
    ragged["vdd_disruptive"] = "1";
    CHECK_THROWS_AS(trace_from_json(ragged), ConfigError);

    auto short_net = trace_to_json(tiny_trace());
    short_net["values"][1] = "01";
    CHECK_THROWS_AS(trace_from_json(short_net), ConfigError);
}

TEST_CASE("a simulated trace survives the json round trip byte for byte") {
    const Trace t = chain_trace();
    REQUIRE(t.trigger_events.size() == 1);
    const auto j = trace_to_json(t);
    const Trace r = trace_from_json(j);
    CHECK(trace_to_json(r).dump() == j.dump());
    CHECK(r.trigger_events[0].time_ns == 770);

    std::ostringstream v1, v2;
    write_vcd(v1, t);
    write_vcd(v2, t);
    CHECK(v1.str() == v2.str());
    CHECK(v1.str().find("#770\n") != std::string::npos);
    CHECK(v1.str().find("#1500\n") != std::string::npos);

    std::ostringstream c;
    write_csv(c, t);
    std::size_t lines = 0;
    for (const char ch : c.str())
        if (ch == '\n') ++lines;
    CHECK(lines == t.sample_times.size() + 1);
}

TEST_CASE("text file helpers round trip and report failures") {
    const std::string path = "/tmp/demist_io_test.txt";
    write_text_file(path, "hello\nworld\n");
    CHECK(read_text_file(path) == "hello\nworld\n");
    std::remove(path.c_str());
    CHECK_THROWS_AS(read_text_file(path), ConfigError);
    CHECK_THROWS_AS(write_text_file("/nonexistent-dir/x.txt", "y"), ConfigError);
}
