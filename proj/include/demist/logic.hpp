#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>

namespace demist {

// Three-valued signal level. X is the degraded value a combinational gate
// drives while its zone's supply is off; it propagates with Kleene rules.
enum class LogicValue : std::uint8_t { Zero = 0, One = 1, X = 2 };

inline constexpr LogicValue lv_not(LogicValue a) {
    switch (a) {
        case LogicValue::Zero: return LogicValue::One;
        case LogicValue::One: return LogicValue::Zero;
        default: return LogicValue::X;
    }
}

inline constexpr LogicValue lv_and(LogicValue a, LogicValue b) {
    if (a == LogicValue::Zero || b == LogicValue::Zero) return LogicValue::Zero;
    if (a == LogicValue::One && b == LogicValue::One) return LogicValue::One;
    return LogicValue::X;
}

inline constexpr LogicValue lv_or(LogicValue a, LogicValue b) {
    if (a == LogicValue::One || b == LogicValue::One) return LogicValue::One;
    if (a == LogicValue::Zero && b == LogicValue::Zero) return LogicValue::Zero;
    return LogicValue::X;
}

inline constexpr LogicValue lv_xor(LogicValue a, LogicValue b) {
    if (a == LogicValue::X || b == LogicValue::X) return LogicValue::X;
    return a == b ? LogicValue::Zero : LogicValue::One;
}

// sel=1 selects a, sel=0 selects b. An X select still yields a concrete
// value when both data inputs agree.
inline constexpr LogicValue lv_mux(LogicValue sel, LogicValue a, LogicValue b) {
    if (sel == LogicValue::One) return a;
    if (sel == LogicValue::Zero) return b;
    return a == b ? a : LogicValue::X;
}

inline constexpr bool is_concrete(LogicValue v) { return v != LogicValue::X; }

inline constexpr char lv_char(LogicValue v) {
    return v == LogicValue::Zero ? '0' : v == LogicValue::One ? '1' : 'x';
}

} // namespace demist
