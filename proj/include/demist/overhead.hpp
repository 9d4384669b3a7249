#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "demist/errors.hpp"
#include "demist/netlist.hpp"

namespace demist {

// Lambda-rule cell areas. Baselines: a NAND at 40λ x 32λ and a DFF at
// 80λ x 48λ; a 2:1 mux is charged as its textbook four-NAND realization
// since no mux figure is given. Combinational kinds default to one NAND
// equivalent each; supply overrides for a finer model.
struct CellAreaModel {
    double nand_area = 40.0 * 32.0; // 1280 λ²
    double dff_area = 80.0 * 48.0;  // 3840 λ²
    double mux2_nand_equiv = 4.0;
    std::map<GateKind, double> nand_equiv_override;

    double mux2_area() const { return mux2_nand_equiv * nand_area; }
    double gate_area(GateKind k) const {
        if (k == GateKind::Dff) return dff_area;
        if (const auto it = nand_equiv_override.find(k); it != nand_equiv_override.end())
            return it->second * nand_area;
        if (k == GateKind::Mux2) return mux2_area();
        return nand_area;
    }
};

struct MitigationCells {
    std::size_t mux2 = 2;
    std::size_t dff = 7;
};

inline double mitigation_area(const CellAreaModel& model, const MitigationCells& cells) {
    return static_cast<double>(cells.mux2) * model.mux2_area()
           + static_cast<double>(cells.dff) * model.dff_area;
}

// Named-cell variant for counts coming from config files.
inline double mitigation_area(const CellAreaModel& model,
                              const std::map<std::string, std::size_t>& cells) {
    double total = 0.0;
    for (const auto& [kind, count] : cells) {
        const auto gk = gate_kind_from_string(kind);
        if (!gk) throw ConfigError("unknown cell kind '" + kind + "'");
        total += static_cast<double>(count) * model.gate_area(*gk);
    }
    return total;
}

inline double benchmark_area(const Netlist& n, const CellAreaModel& model = {}) {
    double total = 0.0;
    for (const auto& g : n.gates()) total += model.gate_area(g.kind);
    return total;
}

inline double overhead_percent(double mitigation, double benchmark) {
    if (!(benchmark > 0.0)) throw ConfigError("benchmark area must be positive");
    return 100.0 * mitigation / benchmark;
}

inline double round2(double x) { return std::round(x * 100.0) / 100.0; }

struct OverheadReport {
    std::string benchmark_name;
    std::size_t gate_count = 0;
    std::size_t dff_count = 0;
    MitigationCells cells;
    double mitigation_area_l2 = 0.0;
    double benchmark_area_l2 = 0.0;
    double overhead_pct = 0.0;
};

inline OverheadReport make_overhead_report(const Netlist& n, const CellAreaModel& model = {},
                                           const MitigationCells& cells = {}) {
    OverheadReport r;
    r.benchmark_name = n.name();
    const auto st = n.stats();
    r.gate_count = st.gate_count;
    r.dff_count = st.dff_count;
    r.cells = cells;
    r.mitigation_area_l2 = mitigation_area(model, cells);
    r.benchmark_area_l2 = benchmark_area(n, model);
    r.overhead_pct = overhead_percent(r.mitigation_area_l2, r.benchmark_area_l2);
    return r;
}

} // namespace demist
