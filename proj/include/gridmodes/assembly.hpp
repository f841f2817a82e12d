#pragma once

// Voltage-node assembly of the system matrices at one complex frequency:
//   Y_N  network passive part, Y_S  external shunt part (converters, grid
//   equivalents, black-box tables), Y_T = Y_N + Y_S, Z_N = Y_N^{-1} (lazy).
// Buses are laid out in declaration order, one (q, d) block pair each.
// Includes the Schur-complement bus elimination used both by the grouping
// transform's correctness tests and by callers wanting raw Kron reduction.

#include "gridmodes/elements.hpp"
#include "gridmodes/netmodel.hpp"
#include "gridmodes/vsc.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace gridmodes {

struct SystemMatrices {
    MatX y_n, y_s, y_t; // 2n x 2n
    std::vector<BusId> bus_order;
    cplx s = 0.0;

    int n_buses() const { return static_cast<int>(bus_order.size()); }

    /// Z_N = Y_N^{-1}, computed on first use. zn_rcond carries the LU
    /// reciprocal-condition estimate so callers can warn on ill conditioning.
    const MatX& z_n() const {
        if (!zn_) {
            Eigen::PartialPivLU<MatX> lu(y_n);
            zn_rcond = lu.rcond();
            zn_ = lu.inverse();
        }
        return *zn_;
    }
    mutable double zn_rcond = 0.0;

private:
    mutable std::optional<MatX> zn_;
};

namespace detail {

inline double table_frequency(cplx s, const std::string& name) {
    if (std::abs(s.real()) > 1e-9 * std::max(1.0, std::abs(s.imag())))
        throw Error("measured.off_axis",
                    "element '" + name + "': measured tables are defined on the jw axis only");
    return s.imag() / (2.0 * M_PI);
}

inline Mat2 measured_table_eval(const MeasuredTable& t, double f_hz, const std::string& name) {
    const auto& fs = t.frequencies_hz;
    if (f_hz < fs.front() || f_hz > fs.back())
        throw Error("measured.out_of_range",
                    "element '" + name + "': " + std::to_string(f_hz) +
                        " Hz is outside the tabulated range [" + std::to_string(fs.front()) +
                        ", " + std::to_string(fs.back()) + "]");
    auto hi = std::lower_bound(fs.begin(), fs.end(), f_hz);
    if (hi == fs.begin()) return t.blocks.front();
    const size_t i1 = static_cast<size_t>(hi - fs.begin());
    const size_t i0 = i1 - 1;
    if (i1 == fs.size()) return t.blocks.back();
    const double w = (f_hz - fs[i0]) / (fs[i1] - fs[i0]);
    return (1.0 - w) * t.blocks[i0] + w * t.blocks[i1];
}

} // namespace detail

/// Assemble Y_N, Y_S, Y_T for a validated model. Two-terminal passive
/// elements stamp +Y on both diagonal blocks and -Y on both off-diagonal
/// blocks; shunts stamp +Y on their diagonal; converters, grid equivalents,
/// aggregated converters and measured tables stamp into Y_S.
inline SystemMatrices assemble(const NetworkModel& model, cplx s) {
    const int n = static_cast<int>(model.buses.size());
    SystemMatrices sm;
    sm.bus_order = model.buses;
    sm.s = s;
    sm.y_n = MatX::Zero(2 * n, 2 * n);
    sm.y_s = MatX::Zero(2 * n, 2 * n);
    const double w1 = model.omega1();

    auto idx = [&](const BusId& b) { return 2 * model.bus_index(b); };
    auto stamp_branch = [&](MatX& m, const BusId& from, const BusId& to, const Mat2& y) {
        const int i = idx(from);
        if (to == kGroundBus) {
            m.block<2, 2>(i, i) += y;
            return;
        }
        const int j = idx(to);
        m.block<2, 2>(i, i) += y;
        m.block<2, 2>(j, j) += y;
        m.block<2, 2>(i, j) -= y;
        m.block<2, 2>(j, i) -= y;
    };
    auto stamp_shunt = [&](MatX& m, const BusId& bus, const Mat2& y) {
        const int i = idx(bus);
        m.block<2, 2>(i, i) += y;
    };

    for (const auto& el : model.elements) {
        try {
            std::visit(
                [&](const auto& b) {
                    using T = std::decay_t<decltype(b)>;
                    if constexpr (std::is_same_v<T, RlSeries>) {
                        stamp_branch(sm.y_n, b.from, b.to,
                                     rl_series_admittance(b.r, b.l, w1, s).m);
                    } else if constexpr (std::is_same_v<T, Transformer>) {
                        stamp_branch(sm.y_n, b.from, b.to,
                                     rl_series_admittance(b.r, b.l, w1, s).m);
                    } else if constexpr (std::is_same_v<T, ShuntCap>) {
                        stamp_shunt(sm.y_n, b.bus, shunt_cap_admittance(b.c, w1, s).m);
                    } else if constexpr (std::is_same_v<T, PiCable>) {
                        const PiExpansion pi = pi_cable_expand(b.r, b.l, b.c_total);
                        stamp_branch(sm.y_n, b.from, b.to,
                                     rl_series_admittance(pi.r, pi.l, w1, s).m);
                        stamp_shunt(sm.y_n, b.from, shunt_cap_admittance(pi.c_half, w1, s).m);
                        stamp_shunt(sm.y_n, b.to, shunt_cap_admittance(pi.c_half, w1, s).m);
                    } else if constexpr (std::is_same_v<T, GridEquivalent>) {
                        stamp_shunt(sm.y_s, b.bus, rl_series_admittance(b.r, b.l, w1, s).m);
                    } else if constexpr (std::is_same_v<T, Vsc>) {
                        stamp_shunt(sm.y_s, b.bus, vsc_admittance(b.params, w1, s).m);
                    } else if constexpr (std::is_same_v<T, AggregatedVsc>) {
                        stamp_shunt(sm.y_s, b.bus, aggregated_vsc_admittance(b, w1, s).m);
                    } else if constexpr (std::is_same_v<T, MeasuredTable>) {
                        const double f = detail::table_frequency(s, el.name);
                        stamp_shunt(sm.y_s, b.bus, detail::measured_table_eval(b, f, el.name));
                    }
                },
                el.body);
        } catch (const Error& e) {
            throw Error(e.code(), "element '" + el.name + "' at s = (" +
                                      std::to_string(s.real()) + ", " + std::to_string(s.imag()) +
                                      ") rad/s: " + e.what());
        }
    }
    sm.y_t = sm.y_n + sm.y_s;
    return sm;
}

/// Schur complement of the full matrix eliminating the listed bus indices:
/// Y_kk - Y_ke * Y_ee^{-1} * Y_ek over 2x2 bus blocks.
inline MatX kron_reduce(const MatX& y, const std::vector<int>& eliminate_buses) {
    const int n = static_cast<int>(y.rows()) / 2;
    std::vector<bool> drop(static_cast<size_t>(n), false);
    for (int b : eliminate_buses) drop[static_cast<size_t>(b)] = true;
    std::vector<int> keep_rows, elim_rows;
    for (int b = 0; b < n; ++b) {
        for (int r = 0; r < 2; ++r)
            (drop[static_cast<size_t>(b)] ? elim_rows : keep_rows).push_back(2 * b + r);
    }
    const int nk = static_cast<int>(keep_rows.size());
    const int ne = static_cast<int>(elim_rows.size());
    MatX ykk(nk, nk), yke(nk, ne), yek(ne, nk), yee(ne, ne);
    for (int i = 0; i < nk; ++i)
        for (int j = 0; j < nk; ++j) ykk(i, j) = y(keep_rows[static_cast<size_t>(i)], keep_rows[static_cast<size_t>(j)]);
    for (int i = 0; i < nk; ++i)
        for (int j = 0; j < ne; ++j) yke(i, j) = y(keep_rows[static_cast<size_t>(i)], elim_rows[static_cast<size_t>(j)]);
    for (int i = 0; i < ne; ++i)
        for (int j = 0; j < nk; ++j) yek(i, j) = y(elim_rows[static_cast<size_t>(i)], keep_rows[static_cast<size_t>(j)]);
    for (int i = 0; i < ne; ++i)
        for (int j = 0; j < ne; ++j) yee(i, j) = y(elim_rows[static_cast<size_t>(i)], elim_rows[static_cast<size_t>(j)]);
    Eigen::PartialPivLU<MatX> lu(yee);
    if (!(lu.rcond() > 1e-15))
        throw Error("kron.singular", "eliminated block is singular in Kron reduction");
    return ykk - yke * lu.solve(yek);
}

/// One merge instruction: the named converter, its shunt filter element on
/// the same bus, and the series element connecting that bus to the rest of
/// the network. The converter bus disappears from the reduced model.
struct GroupingDirective {
    std::string vsc;
    std::string shunt;
    std::string series;
};

/// Apply merge directives, producing a reduced model with one fewer bus per
/// directive and an aggregated converter element on each surviving bus.
/// Throws grouping.pattern when the named elements do not form the
/// converter + shunt filter + series branch pattern around a removable bus.
inline NetworkModel apply_grouping(const NetworkModel& model,
                                   const std::vector<GroupingDirective>& directives) {
    NetworkModel out = model;
    for (const auto& d : directives) {
        const Element* vsc_el = out.find_element(d.vsc);
        const Element* shunt_el = out.find_element(d.shunt);
        const Element* series_el = out.find_element(d.series);
        auto fail = [&](const std::string& why) -> void {
            throw Error("grouping.pattern", "directive (" + d.vsc + ", " + d.shunt + ", " +
                                                d.series + "): " + why);
        };
        if (!vsc_el) fail("no element named '" + d.vsc + "'");
        if (!shunt_el) fail("no element named '" + d.shunt + "'");
        if (!series_el) fail("no element named '" + d.series + "'");
        const Vsc* vsc = std::get_if<Vsc>(&vsc_el->body);
        if (!vsc) fail("'" + d.vsc + "' is not a vsc element");
        const ShuntCap* shunt = std::get_if<ShuntCap>(&shunt_el->body);
        if (!shunt) fail("'" + d.shunt + "' is not a shunt_cap element");
        const BusId interior = vsc->bus;
        if (shunt->bus != interior) fail("shunt filter is not on the converter bus");

        BusId survivor;
        double series_r = 0.0, series_l = 0.0;
        if (const Transformer* t = std::get_if<Transformer>(&series_el->body)) {
            if (t->from != interior && t->to != interior)
                fail("series element does not touch the converter bus");
            survivor = t->from == interior ? t->to : t->from;
            series_r = t->r;
            series_l = t->l;
        } else if (const RlSeries* t = std::get_if<RlSeries>(&series_el->body)) {
            if (t->from != interior && t->to != interior)
                fail("series element does not touch the converter bus");
            survivor = t->from == interior ? t->to : t->from;
            series_r = t->r;
            series_l = t->l;
        } else {
            fail("'" + d.series + "' is not a series branch element");
        }
        if (survivor == kGroundBus) fail("series branch must end on a network bus");
        // the interior bus must carry nothing else, or elimination would
        // silently drop elements
        for (const auto& el : out.elements) {
            if (el.name == d.vsc || el.name == d.shunt || el.name == d.series) continue;
            bool touches = false;
            std::visit(
                [&](const auto& b) {
                    using T = std::decay_t<decltype(b)>;
                    if constexpr (std::is_same_v<T, RlSeries> || std::is_same_v<T, PiCable> ||
                                  std::is_same_v<T, Transformer>)
                        touches = b.from == interior || b.to == interior;
                    else
                        touches = b.bus == interior;
                },
                el.body);
            if (touches) fail("bus '" + interior + "' also carries element '" + el.name + "'");
        }
        for (const auto& inj : out.injections)
            if (inj == interior) fail("bus '" + interior + "' carries a Norton injection");

        AggregatedVsc merged;
        merged.bus = survivor;
        merged.params = vsc->params;
        merged.shunt_c = shunt->c;
        merged.series_r = series_r;
        merged.series_l = series_l;

        std::vector<Element> kept;
        for (auto& el : out.elements)
            if (el.name != d.vsc && el.name != d.shunt && el.name != d.series)
                kept.push_back(std::move(el));
        kept.push_back(Element{vsc_el->name + "_grouped", merged});
        out.elements = std::move(kept);
        out.buses.erase(std::remove(out.buses.begin(), out.buses.end(), interior),
                        out.buses.end());
    }
    return out;
}

/// Parse a grouping directive file: {"directives": [{"vsc": ..., "shunt":
/// ..., "series": ...}, ...]}.
inline std::vector<GroupingDirective> parse_grouping(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("parse.syntax", std::string("grouping file is not valid JSON: ") + e.what());
    }
    detail::reject_unknown(j, {"directives"}, "grouping file");
    std::vector<GroupingDirective> out;
    if (!j.contains("directives") || !j.at("directives").is_array())
        throw Error("parse.missing_field", "grouping file: missing 'directives' array");
    for (const auto& dj : j.at("directives")) {
        detail::reject_unknown(dj, {"vsc", "shunt", "series"}, "grouping directive");
        out.push_back(GroupingDirective{detail::get_str(dj, "vsc", "grouping directive"),
                                        detail::get_str(dj, "shunt", "grouping directive"),
                                        detail::get_str(dj, "series", "grouping directive")});
    }
    return out;
}

} // namespace gridmodes
