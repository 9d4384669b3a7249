#include <algorithm>
#include <random>

#include "catch_amalgamated.hpp"
#include "demist/sim.hpp"
#include "support/oracles.hpp"

using namespace demist;

namespace {

const char* kChainBench = R"(
INPUT(in0)
INPUT(in1)
OUTPUT(out)
inv1 = NOT(in0)
inv2 = NOT(inv1)
mid = AND(inv2, in1)
out = OR(mid, in0)
)";

const char* kCombBench = R"(
INPUT(a)
INPUT(b)
OUTPUT(x)
OUTPUT(y)
n1 = NAND(a, b)
n2 = XOR(a, n1)
x = AND(n1, n2)
y = OR(n2, b)
)";

LogicValue net_at(const Trace& tr, const std::string& net, std::size_t sample) {
    const auto it = std::find(tr.recorded_nets.begin(), tr.recorded_nets.end(), net);
    REQUIRE(it != tr.recorded_nets.end());
    const auto idx = static_cast<std::size_t>(it - tr.recorded_nets.begin());
    return tr.samples[idx][sample];
}

std::size_t sample_index(const Trace& tr, TimeNs t) {
    const auto it = std::find(tr.sample_times.begin(), tr.sample_times.end(), t);
    REQUIRE(it != tr.sample_times.end());
    return static_cast<std::size_t>(it - tr.sample_times.begin());
}

AhtAttachment chain_attachment(TriggerParams p) {
    AhtAttachment a;
    a.params = p;
    a.victim = "inv2";
    a.payload = "mid";
    return a;
}

} // namespace

TEST_CASE("stimulus builders are deterministic and validated") {
    const Netlist n = parse_bench(kChainBench);
    const auto s1 = random_stimulus(n, 50, 42);
    const auto s2 = random_stimulus(n, 50, 42);
    const auto s3 = random_stimulus(n, 50, 43);
    CHECK(s1.vectors == s2.vectors);
    CHECK(s1.vectors != s3.vectors);
    REQUIRE(s1.vectors.size() == 50);
    CHECK(s1.vectors[0].size() == 2);

    const auto d = directed_toggle_stimulus(n, 6, 0);
    for (std::size_t j = 0; j < d.vectors.size(); ++j) {
        CHECK(d.vectors[j][0] == ((j & 1u) ? LogicValue::One : LogicValue::Zero));
        CHECK(d.vectors[j][1] == LogicValue::Zero);
    }
    CHECK_THROWS_AS(directed_toggle_stimulus(n, 6, 2), ConfigError);

    const auto cat = concat_stimulus(s1, d);
    CHECK(cat.vectors.size() == 56);
    auto slow = d;
    slow.clock_period_ns = 20;
    CHECK_THROWS_AS(concat_stimulus(s1, slow), ConfigError);

    CHECK_NOTHROW(validate_stimulus(n, s1));
    Stimulus empty;
    CHECK_THROWS_AS(validate_stimulus(n, empty), ConfigError);
    Stimulus narrow;
    narrow.vectors = {{LogicValue::Zero}};
    CHECK_THROWS_AS(validate_stimulus(n, narrow), ConfigError);
    Stimulus hazy;
    hazy.vectors = {{LogicValue::Zero, LogicValue::X}};
    CHECK_THROWS_AS(validate_stimulus(n, hazy), ConfigError);
    auto bad_clock = s1;
    bad_clock.clock_period_ns = 0;
    CHECK_THROWS_AS(validate_stimulus(n, bad_clock), ConfigError);
}

TEST_CASE("find_toggle_input follows inverter and buffer chains") {
    const Netlist n = parse_bench(R"(
INPUT(a)
INPUT(b)
OUTPUT(y)
i1 = NOT(b)
i2 = BUF(i1)
i3 = NOT(i2)
y = AND(i3, a)
)");
    CHECK(find_toggle_input(n, "i3") == 1);
    CHECK(find_toggle_input(n, "i1") == 1);
    CHECK(find_toggle_input(n, "a") == 0);
    CHECK_FALSE(find_toggle_input(n, "y").has_value());
    CHECK_THROWS_AS(find_toggle_input(n, "ghost"), NetlistError);
}

TEST_CASE("three-valued connectives follow Kleene rules") {
    const auto O = LogicValue::Zero;
    const auto I = LogicValue::One;
    const auto X = LogicValue::X;
    CHECK(lv_not(O) == I);
    CHECK(lv_not(I) == O);
    CHECK(lv_not(X) == X);
    CHECK(lv_and(O, X) == O); // dominant zero
    CHECK(lv_and(I, X) == X);
    CHECK(lv_or(I, X) == I);  // dominant one
    CHECK(lv_or(O, X) == X);
    CHECK(lv_xor(I, X) == X);
    CHECK(lv_xor(I, O) == I);
    CHECK(lv_mux(I, O, I) == O);
    CHECK(lv_mux(O, O, I) == I);
    CHECK(lv_mux(X, I, I) == I); // agreeing data hides the select
    CHECK(lv_mux(X, O, I) == X);
    CHECK(is_concrete(O));
    CHECK_FALSE(is_concrete(X));
    CHECK(lv_char(O) == '0');
    CHECK(lv_char(I) == '1');
    CHECK(lv_char(X) == 'x');
}

TEST_CASE("n-ary gates evaluate over the whole input list") {
    const Netlist n = parse_bench(R"(
INPUT(a)
INPUT(b)
INPUT(c)
OUTPUT(w)
g1 = NAND(a, b, c)
g2 = NOR(a, b, c)
g3 = XOR(a, b, c)
g4 = XNOR(a, b, c)
w = AND(g1, g2, g3, g4)
)");
    auto st = init_state(n);
    auto val = [&](const char* net) { return st.net_values[n.net_id(net)]; };
    st = eval_cycle(n, st, {LogicValue::One, LogicValue::One, LogicValue::One}, true);
    CHECK(val("g1") == LogicValue::Zero);
    CHECK(val("g2") == LogicValue::Zero);
    CHECK(val("g3") == LogicValue::One); // odd parity
    CHECK(val("g4") == LogicValue::Zero);
    st = eval_cycle(n, st, {LogicValue::One, LogicValue::One, LogicValue::Zero}, true);
    CHECK(val("g1") == LogicValue::One);
    CHECK(val("g3") == LogicValue::Zero);
    CHECK(val("g4") == LogicValue::One);
    // dominant values force an answer through an X input
    st = eval_cycle(n, st, {LogicValue::Zero, LogicValue::X, LogicValue::X}, true);
    CHECK(val("g1") == LogicValue::One);
    CHECK(val("g2") == LogicValue::X);
    CHECK(val("g3") == LogicValue::X);
}

TEST_CASE("init_state settles reset values") {
    const Netlist n = parse_bench(R"(
INPUT(a)
OUTPUT(q)
d = NOT(q)
q = DFF(d)
)");
    const auto st = init_state(n);
    CHECK(st.net_values[n.net_id("a")] == LogicValue::Zero);
    CHECK(st.net_values[n.net_id("q")] == LogicValue::Zero);
    CHECK(st.net_values[n.net_id("d")] == LogicValue::One);
    REQUIRE(st.dff_values.size() == 1);
    CHECK(st.dff_values[0] == LogicValue::Zero);

    const auto hazy = init_state(n, InitPolicy::AllX);
    CHECK(hazy.dff_values[0] == LogicValue::X);
    CHECK(hazy.net_values[n.net_id("q")] == LogicValue::X);
    CHECK(hazy.net_values[n.net_id("d")] == LogicValue::X);

    const auto preset = init_state(n, std::vector<LogicValue>{LogicValue::One});
    CHECK(preset.net_values[n.net_id("q")] == LogicValue::One);
    CHECK(preset.net_values[n.net_id("d")] == LogicValue::Zero);
    CHECK_THROWS_AS(init_state(n, std::vector<LogicValue>{}), ConfigError);
}

TEST_CASE("eval_cycle shifts a flip-flop pipeline by one stage per clock") {
    const Netlist n = parse_bench(R"(
INPUT(a)
OUTPUT(q2)
q1 = DFF(a)
q2 = DFF(q1)
)");
    auto st = init_state(n);
    auto q = [&](const char* net) { return st.net_values[n.net_id(net)]; };
    st = eval_cycle(n, st, {LogicValue::One}, true);
    CHECK(q("q1") == LogicValue::Zero);
    CHECK(q("q2") == LogicValue::Zero);
    CHECK(st.cycle == 1);
    CHECK(st.time_ns == kDefaultClockPeriodNs);
    st = eval_cycle(n, st, {LogicValue::One}, true);
    CHECK(q("q1") == LogicValue::One);
    CHECK(q("q2") == LogicValue::Zero);
    st = eval_cycle(n, st, {LogicValue::One}, true);
    CHECK(q("q1") == LogicValue::One);
    CHECK(q("q2") == LogicValue::One);
    CHECK_THROWS_AS(eval_cycle(n, st, {LogicValue::One, LogicValue::Zero}, true), ConfigError);
}

TEST_CASE("supply-off cycles drive combinational nets to X and corrupt bare flip-flops") {
    const Netlist n = parse_bench(R"(
INPUT(a)
OUTPUT(q)
d = NOT(a)
q = DFF(d)
)");
    auto st = init_state(n);
    st = eval_cycle(n, st, {LogicValue::Zero}, true);
    CHECK(st.net_values[n.net_id("d")] == LogicValue::One);
    st = eval_cycle(n, st, {LogicValue::Zero}, false);
    // flip-flop kept its non-disruptive supply: it latched the last good value
    CHECK(st.net_values[n.net_id("q")] == LogicValue::One);
    CHECK(st.net_values[n.net_id("d")] == LogicValue::X);
    st = eval_cycle(n, st, {LogicValue::Zero}, true);
    // the X settled during the dark cycle is what the flip-flop captured
    CHECK(st.net_values[n.net_id("q")] == LogicValue::X);
    CHECK(st.net_values[n.net_id("d")] == LogicValue::One);
}

TEST_CASE("save path holds wrapped state through supply-off cycles") {
    Netlist w = wrap_state_saving(parse_bench(kCombBench), {"x", "y"});
    auto st = init_state(w);
    st = eval_cycle(w, st, {LogicValue::One, LogicValue::One}, true);
    st = eval_cycle(w, st, {LogicValue::One, LogicValue::One}, true);
    // a=1,b=1: n1=0, n2=1, x=0, y=1; saved copies captured at the boundary
    CHECK(st.net_values[w.net_id("x")] == LogicValue::Zero);
    CHECK(st.net_values[w.net_id("y")] == LogicValue::One);
    CHECK(st.net_values[w.net_id("SEL")] == LogicValue::One);
    for (int k = 0; k < 3; ++k) {
        st = eval_cycle(w, st, {LogicValue::One, LogicValue::One}, false);
        CHECK(st.net_values[w.net_id("SEL")] == LogicValue::Zero);
        CHECK(st.net_values[w.net_id("x_raw")] == LogicValue::X);
        CHECK(st.net_values[w.net_id("x")] == LogicValue::Zero);
        CHECK(st.net_values[w.net_id("y")] == LogicValue::One);
    }
    st = eval_cycle(w, st, {LogicValue::Zero, LogicValue::One}, true);
    CHECK(st.net_values[w.net_id("x_raw")] == LogicValue::One);
}

TEST_CASE("zone pragma keeps tagged logic alive while the disruptive zone is dark") {
    const Netlist n = parse_bench(R"(
INPUT(a)
OUTPUT(z)
nd1 = NOT(a)
z = BUF(nd1)
# pragma demist zone non_disruptive nd1
)");
    const auto sched = schedule_from_duty(20, 0.5, 0, 200);
    RunOptions opts;
    opts.record_nets = {"nd1", "z"};
    const auto tr = run(n, directed_toggle_stimulus(n, 20, 0), uniform_schedules(sched), {}, 200, opts);
    for (std::size_t i = 0; i < tr.sample_times.size(); ++i) {
        CHECK(net_at(tr, "nd1", i) != LogicValue::X);
        if (!tr.vdd_disruptive[i]) CHECK(net_at(tr, "z", i) == LogicValue::X);
    }
    CHECK(tr.stall_cycles == 10);
}

TEST_CASE("run validates horizons, schedules and attachments") {
    const Netlist n = parse_bench(kChainBench);
    const auto s = directed_toggle_stimulus(n, 10, 0);
    CHECK_THROWS_AS(run(n, s, uniform_schedules(always_on(1000)), {}, 5), SimError);
    CHECK_THROWS_AS(run(n, s, uniform_schedules(always_on(40)), {}, 100), SimError);

    AhtInstance bad;
    bad.params = default_trigger_params();
    bad.victim_net = 9999;
    bad.payload_net = 0;
    CHECK_THROWS_AS(run(n, s, uniform_schedules(always_on(100)), {bad}, 100), SimError);

    AhtInstance invalid;
    invalid.params = default_trigger_params();
    invalid.params.c_unit = 0.0;
    invalid.victim_net = n.net_id("inv2");
    invalid.payload_net = n.net_id("mid");
    CHECK_THROWS_AS(run(n, s, uniform_schedules(always_on(100)), {invalid}, 100), ConfigError);
}

TEST_CASE("full-duty trace arrays stay aligned and boundary-sampled") {
    const Netlist n = parse_bench(kChainBench);
    const auto s = directed_toggle_stimulus(n, 12, 0);
    const auto tr = run(n, s, uniform_schedules(always_on(120)), {}, 120);
    CHECK(tr.horizon_ns == 120);
    CHECK(tr.clock_period_ns == 10);
    REQUIRE(tr.sample_times.size() == 13); // boundaries 0..120, no interior edges
    for (std::size_t i = 0; i < tr.sample_times.size(); ++i)
        CHECK(tr.sample_times[i] == static_cast<TimeNs>(i) * 10);
    for (const auto& lane : tr.samples) CHECK(lane.size() == tr.sample_times.size());
    CHECK(tr.vdd_disruptive.size() == tr.sample_times.size());
    CHECK(tr.vdd_non_disruptive.size() == tr.sample_times.size());
    CHECK(std::count(tr.vdd_disruptive.begin(), tr.vdd_disruptive.end(), 1)
          == static_cast<long>(tr.sample_times.size()));
    CHECK(tr.toggles_per_cycle.size() == 12);
    CHECK(tr.toggles_per_cycle[0] == 0);
    // in0 flips every cycle and drags inv1, inv2, mid(=0 stays), out along
    CHECK(tr.toggles_per_cycle[1] > 0);
    CHECK(tr.sel_per_cycle == std::vector<std::uint8_t>(12, 1));
    CHECK(tr.stall_cycles == 0);
    // default recording covers inputs and outputs
    for (const char* net : {"in0", "in1", "out"})
        CHECK(std::find(tr.recorded_nets.begin(), tr.recorded_nets.end(), net)
              != tr.recorded_nets.end());
}

TEST_CASE("record options select the sampled nets") {
    const Netlist n = parse_bench(kChainBench);
    const auto s = directed_toggle_stimulus(n, 5, 0);
    RunOptions subset;
    subset.record_nets = {"inv1", "inv1", "out"};
    const auto tr = run(n, s, uniform_schedules(always_on(50)), {}, 50, subset);
    CHECK(tr.recorded_nets == std::vector<std::string>{"inv1", "out"});

    RunOptions all;
    all.record_all_nets = true;
    const auto tr2 = run(n, s, uniform_schedules(always_on(50)), {}, 50, all);
    CHECK(tr2.recorded_nets.size() == n.net_names().size());

    RunOptions ghost;
    ghost.record_nets = {"nope"};
    CHECK_THROWS_AS(run(n, s, uniform_schedules(always_on(50)), {}, 50, ghost), NetlistError);
}

TEST_CASE("X to concrete transitions never count as toggles") {
    const Netlist n = parse_bench(R"(
INPUT(a)
OUTPUT(d)
d = OR(a, q)
q = DFF(d)
)");
    Stimulus s;
    s.vectors = {{LogicValue::One}, {LogicValue::Zero}, {LogicValue::Zero}};
    RunOptions opts;
    opts.init = InitPolicy::AllX;
    const auto tr = run(n, s, uniform_schedules(always_on(30)), {}, 30, opts);
    REQUIRE(tr.toggles_per_cycle.size() == 3);
    CHECK(tr.toggles_per_cycle[0] == 0);
    CHECK(tr.toggles_per_cycle[1] == 1); // only a: 1 -> 0; q resolves X -> 1 silently
    CHECK(tr.toggles_per_cycle[2] == 0);
}

TEST_CASE("stall-free logical view is invariant across duty cycles") {
    Netlist w = wrap_state_saving(parse_bench(kCombBench), {"x", "y"});
    const std::size_t kVectors = 40;
    const auto s = random_stimulus(w, kVectors, 99);

    const TimeNs h_full = horizon_for_powered_cycles(always_on(0), 10, kVectors);
    CHECK(h_full == 400);
    const auto full = run(w, s, uniform_schedules(always_on(h_full)), {}, h_full);
    REQUIRE(full.logical_outputs.size() == kVectors + 1);
    CHECK(full.saved_net_names == std::vector<std::string>{"x", "y"});
    for (std::size_t r = 0; r < full.logical_outputs.size(); ++r) {
        CHECK(full.logical_latch_cycle[r] == r);
        for (const auto v : full.logical_outputs[r]) CHECK(v != LogicValue::X);
    }

    for (double duty : {0.6, 0.5, 0.34}) {
        const auto probe = schedule_from_duty(50, duty, 0, 0);
        const TimeNs h = horizon_for_powered_cycles(probe, 10, kVectors);
        const auto sched = schedule_from_duty(50, duty, 0, h);
        const auto tr = run(w, s, uniform_schedules(sched), {}, h);
        INFO("duty=" << duty);
        CHECK(tr.logical_outputs == full.logical_outputs);
        CHECK(tr.stall_cycles > 0);
        CHECK(std::is_sorted(tr.logical_latch_cycle.begin(), tr.logical_latch_cycle.end()));
    }
}

TEST_CASE("gate-level trigger fires at the calibrated boundary") {
    const Netlist base = parse_bench(kChainBench);
    const Netlist n = inject_aht(base, chain_attachment(default_trigger_params()));
    const auto s = directed_toggle_stimulus(n, 200, 0);
    const auto tr = run(n, s, uniform_schedules(always_on(1500)), make_aht_instances(n), 1500);
    REQUIRE(tr.trigger_events.size() == 1);
    CHECK(tr.trigger_events[0].time_ns == 770);
    CHECK(tr.trigger_events[0].aht_index == 0);
    REQUIRE(tr.aht_fired.size() == 1);
    CHECK(tr.aht_fired[0][sample_index(tr, 760)] == 0);
    CHECK(tr.aht_fired[0][sample_index(tr, 770)] == 1);
    CHECK(tr.aht_fired[0].back() == 1);
    CHECK(tr.aht_voltage[0][sample_index(tr, 770)] >= 0.8);

    // the fortified variant needs twice the charges
    const Netlist f = inject_aht(base, chain_attachment(fortified_trigger_params()));
    const auto tf = run(f, s, uniform_schedules(always_on(1600)), make_aht_instances(f), 1600);
    REQUIRE(tf.trigger_events.size() == 1);
    CHECK(tf.trigger_events[0].time_ns == 1540);
    const auto short_run = run(f, s, uniform_schedules(always_on(1500)), make_aht_instances(f), 1500);
    CHECK(short_run.trigger_events.empty());
}

TEST_CASE("gate-level duty cycling matches the bare-trigger march") {
    const Netlist n = inject_aht(parse_bench(kChainBench),
                                 chain_attachment(fortified_trigger_params()));
    const auto p = fortified_trigger_params();
    const auto s = directed_toggle_stimulus(n, 2000, 0);
    struct Case { TimeNs period; double duty; };
    for (const auto& c : {Case{1000, 0.9}, Case{1000, 0.7}, Case{1005, 0.43}}) {
        const TimeNs horizon = 15000;
        const auto sched = schedule_from_duty(c.period, c.duty, 0, horizon);
        const auto tr = run(n, s, uniform_schedules(sched), make_aht_instances(n), horizon);
        double max_v = 0.0;
        for (const auto v : tr.aht_voltage[0]) max_v = std::max(max_v, v);
        const auto oracle_sched = schedule_from_duty(c.period, c.duty, 0, horizon - 10);
        INFO("period=" << c.period << " duty=" << c.duty);
        CHECK_THAT(max_v, Catch::Matchers::WithinAbs(max_toggle_voltage(p, oracle_sched, 10), 1e-9));
        CHECK(tr.trigger_events.empty());
    }
}

TEST_CASE("fired payloads corrupt the downstream cone and stay pinned") {
    const char* bench = R"(
INPUT(a)
INPUT(b)
OUTPUT(y)
inv1 = NOT(b)
pay = NAND(a, a)
y = AND(pay, inv1)
)";
    auto attach = [&](PayloadKind kind) {
        AhtAttachment at;
        at.params = default_trigger_params();
        at.params.v_threshold = 0.01; // first charge crosses
        at.victim = "inv1";
        at.payload = "pay";
        at.payload_kind = kind;
        return inject_aht(parse_bench(bench), at);
    };
    const auto run_kind = [&](PayloadKind kind) {
        const Netlist n = attach(kind);
        const auto s = directed_toggle_stimulus(n, 30, 1);
        RunOptions opts;
        opts.record_nets = {"pay", "y", "inv1"};
        return run(n, s, uniform_schedules(always_on(300)), make_aht_instances(n), 300, opts);
    };

    const auto flip = run_kind(PayloadKind::XorFlip);
    REQUIRE_FALSE(flip.trigger_events.empty());
    CHECK(flip.trigger_events[0].time_ns == 10);
    // before the fire: pay = NOT(a)=1 with a held low, y tracks inv1
    CHECK(net_at(flip, "pay", sample_index(flip, 0)) == LogicValue::One);
    CHECK(net_at(flip, "y", sample_index(flip, 0)) == LogicValue::One);
    for (TimeNs t = 10; t <= 300; t += 10) {
        CHECK(net_at(flip, "pay", sample_index(flip, t)) == LogicValue::Zero);
        CHECK(net_at(flip, "y", sample_index(flip, t)) == LogicValue::Zero);
    }

    const auto zero = run_kind(PayloadKind::ForceZero);
    for (TimeNs t = 10; t <= 300; t += 10)
        CHECK(net_at(zero, "y", sample_index(zero, t)) == LogicValue::Zero);

    // force-one matches what the gate already drives: nothing changes
    const auto one = run_kind(PayloadKind::ForceOne);
    for (TimeNs t = 0; t <= 300; t += 10)
        CHECK(net_at(one, "y", sample_index(one, t)) == net_at(one, "inv1", sample_index(one, t)));
}

TEST_CASE("horizon_for_powered_cycles counts only fully powered cycles") {
    CHECK(horizon_for_powered_cycles(always_on(0), 10, 7) == 70);
    const auto half = schedule_from_duty(20, 0.5, 0, 0);
    CHECK(horizon_for_powered_cycles(half, 10, 5) == 90);
    const auto offgrid = schedule_from_duty(20, 0.5, 5, 0);
    CHECK_THROWS_AS(horizon_for_powered_cycles(offgrid, 10, 1), SimError);
}

TEST_CASE("intra-cycle supply edges are sampled with their level") {
    const Netlist n = parse_bench(kChainBench);
    const auto sched = schedule_from_duty(25, 0.6, 0, 100);
    const auto tr = run(n, directed_toggle_stimulus(n, 10, 0), uniform_schedules(sched), {}, 100);
    const auto i15 = sample_index(tr, 15);
    CHECK(tr.vdd_disruptive[i15] == 0);
    const auto i25 = sample_index(tr, 25);
    CHECK(tr.vdd_disruptive[i25] == 1);
    CHECK(std::is_sorted(tr.sample_times.begin(), tr.sample_times.end()));
    for (std::size_t i = 1; i < tr.sample_times.size(); ++i)
        CHECK(tr.sample_times[i] > tr.sample_times[i - 1]);
}
