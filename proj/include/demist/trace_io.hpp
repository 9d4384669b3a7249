#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "demist/errors.hpp"
#include "demist/sim.hpp"

namespace demist {

namespace detail {

inline std::string short_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// Compact VCD identifier codes over the printable range.
inline std::string vcd_id(std::size_t i) {
    std::string id;
    do {
        id.push_back(static_cast<char>('!' + i % 94));
        i /= 94;
    } while (i > 0);
    return id;
}

} // namespace detail

// IEEE 1364 value-change dump of a trace: 1 ns timescale, scalar wires for
// nets and flags, real variables for capacitor voltages. No date or tool
// header lines, so identical runs produce identical bytes.
inline void write_vcd(std::ostream& os, const Trace& t, const std::string& module_name = "top") {
    os << "$timescale 1ns $end\n";
    os << "$scope module " << module_name << " $end\n";
    std::vector<std::string> ids;
    std::size_t next = 0;
    auto declare = [&](const std::string& type, const std::string& name) {
        ids.push_back(detail::vcd_id(next++));
        os << "$var " << type << " " << (type == "real" ? "64" : "1") << " " << ids.back() << " "
           << name << " $end\n";
    };
    declare("wire", "VDD_disruptive");
    declare("wire", "VDD_non_disruptive");
    for (const auto& n : t.recorded_nets) declare("wire", n);
    for (std::size_t a = 0; a < t.aht_voltage.size(); ++a) {
        declare("real", "aht" + std::to_string(a) + "_vcap");
        declare("wire", "aht" + std::to_string(a) + "_fired");
    }
    os << "$upscope $end\n$enddefinitions $end\n";

    // One emitter per variable, keeping last written text to suppress
    // unchanged values after the initial dump.
    std::vector<std::string> last(ids.size());
    auto emit = [&](std::size_t slot, const std::string& text, bool real) {
        if (text == last[slot]) return;
        last[slot] = text;
        if (real) os << "r" << text << " " << ids[slot] << "\n";
        else os << text << ids[slot] << "\n";
    };
    bool first = true;
    for (std::size_t s = 0; s < t.sample_times.size(); ++s) {
        os << "#" << t.sample_times[s] << "\n";
        if (first) os << "$dumpvars\n";
        std::size_t slot = 0;
        emit(slot++, t.vdd_disruptive[s] ? "1" : "0", false);
        emit(slot++, t.vdd_non_disruptive[s] ? "1" : "0", false);
        for (std::size_t i = 0; i < t.recorded_nets.size(); ++i)
            emit(slot++, std::string(1, lv_char(t.samples[i][s])), false);
        for (std::size_t a = 0; a < t.aht_voltage.size(); ++a) {
            emit(slot++, detail::short_double(t.aht_voltage[a][s]), true);
            emit(slot++, t.aht_fired[a][s] ? "1" : "0", false);
        }
        if (first) {
            os << "$end\n";
            first = false;
        }
    }
}

// CSV view: one row per sample, one column per recorded quantity.
inline void write_csv(std::ostream& os, const Trace& t) {
    os << "time_ns,vdd_disruptive,vdd_non_disruptive";
    for (const auto& n : t.recorded_nets) os << "," << n;
    for (std::size_t a = 0; a < t.aht_voltage.size(); ++a)
        os << ",aht" << a << "_vcap,aht" << a << "_fired";
    os << "\n";
    for (std::size_t s = 0; s < t.sample_times.size(); ++s) {
        os << t.sample_times[s] << "," << int(t.vdd_disruptive[s]) << ","
           << int(t.vdd_non_disruptive[s]);
        for (std::size_t i = 0; i < t.recorded_nets.size(); ++i)
            os << "," << lv_char(t.samples[i][s]);
        for (std::size_t a = 0; a < t.aht_voltage.size(); ++a)
            os << "," << detail::short_double(t.aht_voltage[a][s]) << ","
               << int(t.aht_fired[a][s]);
        os << "\n";
    }
}

inline constexpr const char* kTraceSchema = "demist-trace-v1";

inline nlohmann::ordered_json trace_to_json(const Trace& t) {
    nlohmann::ordered_json j;
    j["schema"] = kTraceSchema;
    j["clock_period_ns"] = t.clock_period_ns;
    j["horizon_ns"] = t.horizon_ns;
    j["sample_times"] = t.sample_times;
    j["nets"] = t.recorded_nets;
    std::vector<std::string> rows;
    for (const auto& seq : t.samples) {
        std::string s;
        s.reserve(seq.size());
        for (const auto v : seq) s.push_back(lv_char(v));
        rows.push_back(std::move(s));
    }
    j["values"] = rows;
    auto flags = [](const std::vector<std::uint8_t>& f) {
        std::string s;
        s.reserve(f.size());
        for (const auto b : f) s.push_back(b ? '1' : '0');
        return s;
    };
    j["vdd_disruptive"] = flags(t.vdd_disruptive);
    j["vdd_non_disruptive"] = flags(t.vdd_non_disruptive);
    j["aht_vcap"] = t.aht_voltage;
    std::vector<std::string> fired;
    for (const auto& f : t.aht_fired) fired.push_back(flags(f));
    j["aht_fired"] = fired;
    nlohmann::ordered_json events = nlohmann::ordered_json::array();
    for (const auto& e : t.trigger_events)
        events.push_back({{"time_ns", e.time_ns}, {"aht", e.aht_index}});
    j["trigger_events"] = events;
    j["toggles_per_cycle"] = t.toggles_per_cycle;
    j["sel_per_cycle"] = flags(t.sel_per_cycle);
    j["saved_nets"] = t.saved_net_names;
    std::vector<std::string> logical;
    for (const auto& row : t.logical_outputs) {
        std::string s;
        for (const auto v : row) s.push_back(lv_char(v));
        logical.push_back(std::move(s));
    }
    j["logical_outputs"] = logical;
    j["logical_latch_cycle"] = t.logical_latch_cycle;
    j["stall_cycles"] = t.stall_cycles;
    return j;
}

inline Trace trace_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("schema") || j.at("schema") != kTraceSchema)
        throw ConfigError("not a " + std::string(kTraceSchema) + " document");
    Trace t;
    t.clock_period_ns = j.at("clock_period_ns").get<TimeNs>();
    t.horizon_ns = j.at("horizon_ns").get<TimeNs>();
    t.sample_times = j.at("sample_times").get<std::vector<TimeNs>>();
    t.recorded_nets = j.at("nets").get<std::vector<std::string>>();
    auto parse_lv = [](char c) {
        switch (c) {
            case '0': return LogicValue::Zero;
            case '1': return LogicValue::One;
            case 'x': case 'X': return LogicValue::X;
            default: throw ConfigError(std::string("bad logic value character '") + c + "'");
        }
    };
    for (const auto& row : j.at("values").get<std::vector<std::string>>()) {
        std::vector<LogicValue> seq;
        seq.reserve(row.size());
        for (const char c : row) seq.push_back(parse_lv(c));
        t.samples.push_back(std::move(seq));
    }
    auto parse_flags = [](const std::string& s) {
        std::vector<std::uint8_t> f;
        f.reserve(s.size());
        for (const char c : s) f.push_back(c == '1' ? 1 : 0);
        return f;
    };
    t.vdd_disruptive = parse_flags(j.at("vdd_disruptive").get<std::string>());
    t.vdd_non_disruptive = parse_flags(j.at("vdd_non_disruptive").get<std::string>());
    t.aht_voltage = j.at("aht_vcap").get<std::vector<std::vector<double>>>();
    for (const auto& s : j.at("aht_fired").get<std::vector<std::string>>())
        t.aht_fired.push_back(parse_flags(s));
    for (const auto& e : j.at("trigger_events"))
        t.trigger_events.push_back({e.at("time_ns").get<TimeNs>(), e.at("aht").get<std::size_t>()});
    t.toggles_per_cycle = j.at("toggles_per_cycle").get<std::vector<std::uint64_t>>();
    t.sel_per_cycle = parse_flags(j.at("sel_per_cycle").get<std::string>());
    t.saved_net_names = j.at("saved_nets").get<std::vector<std::string>>();
    for (const auto& row : j.at("logical_outputs").get<std::vector<std::string>>()) {
        std::vector<LogicValue> seq;
        for (const char c : row) seq.push_back(parse_lv(c));
        t.logical_outputs.push_back(std::move(seq));
    }
    t.logical_latch_cycle = j.at("logical_latch_cycle").get<std::vector<std::uint64_t>>();
    t.stall_cycles = j.at("stall_cycles").get<std::size_t>();
    const std::size_t ns = t.sample_times.size();
    if (t.vdd_disruptive.size() != ns || t.vdd_non_disruptive.size() != ns)
        throw ConfigError("trace sample sequences have inconsistent lengths");
    for (const auto& seq : t.samples)
        if (seq.size() != ns) throw ConfigError("trace sample sequences have inconsistent lengths");
    return t;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    os << content;
    if (!os) throw ConfigError("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    std::string content((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return content;
}

} // namespace demist
