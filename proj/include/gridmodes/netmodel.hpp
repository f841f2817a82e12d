#pragma once

// Declarative network description: buses, attached elements, and Norton
// injection buses. This is the single source of truth every downstream stage
// (assembly, sweeps, criteria) consumes. Models are value types; parsing and
// validation never mutate shared state.

#include "gridmodes/types.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gridmodes {

using BusId = std::string;

/// Reserved terminal name for branches returning to ground.
inline constexpr const char* kGroundBus = "ground";

struct OperatingPoint {
    double v0_q = 0.0;  // converter-local PCC voltage, peak V
    double v0_d = 0.0;
    double ic0_q = 0.0; // converter-local filter current, peak A
    double ic0_d = 0.0;
    double theta0 = 0.0; // global-minus-local angle at the linearization point
};

struct VscParams {
    double kp_pll = 0.0, ki_pll = 0.0;
    double kp_ol = 0.0, ki_ol = 0.0; // P outer loop; Q loop defaults to the same pair
    std::optional<double> kp_olq, ki_olq;
    double kp_il = 0.0, ki_il = 0.0;
    double tau_ffv = 0.0; // feed-forward voltage filter time constant, s
    double tau_sw = 0.0;  // switching period, s
    double q_d = 0.0;     // delay fraction; effective delay tau_fd = q_d * tau_sw
    double r_c = 0.0, l_c = 0.0; // converter filter
    OperatingPoint operating_point;

    double tau_fd() const { return q_d * tau_sw; }
    double kp_olq_eff() const { return kp_olq.value_or(kp_ol); }
    double ki_olq_eff() const { return ki_olq.value_or(ki_ol); }
};

struct RlSeries {
    BusId from, to; // `to` may be kGroundBus
    double r = 0.0, l = 0.0;
};

struct ShuntCap {
    BusId bus;
    double c = 0.0;
};

struct PiCable {
    BusId from, to;
    double r = 0.0, l = 0.0, c_total = 0.0;
};

struct Transformer {
    BusId from, to;
    double r = 0.0, l = 0.0;
};

struct GridEquivalent {
    BusId bus;
    double r = 0.0, l = 0.0;
};

struct Vsc {
    BusId bus;
    VscParams params;
};

/// Result of merging a VSC with its shunt filter and series branch; lives on
/// the surviving bus and stamps into the external subsystem.
struct AggregatedVsc {
    BusId bus;
    VscParams params;
    double shunt_c = 0.0;            // merged filter capacitance
    double series_r = 0.0, series_l = 0.0; // merged series branch
};

/// Tabulated black-box shunt admittance, linearly interpolated in frequency.
struct MeasuredTable {
    BusId bus;
    std::vector<double> frequencies_hz;       // strictly increasing
    std::vector<Mat2> blocks;                 // one 2x2 admittance per frequency
};

using ElementBody =
    std::variant<RlSeries, ShuntCap, PiCable, Transformer, GridEquivalent, Vsc, AggregatedVsc,
                 MeasuredTable>;

struct Element {
    std::string name; // unique; auto-assigned "e<k>" when the file omits it
    ElementBody body;

    const char* kind() const {
        switch (body.index()) {
            case 0: return "rl_series";
            case 1: return "shunt_cap";
            case 2: return "pi_cable";
            case 3: return "transformer";
            case 4: return "grid_equivalent";
            case 5: return "vsc";
            case 6: return "aggregated_vsc";
            default: return "measured_table";
        }
    }
};

struct NetworkModel {
    double f_base_hz = 50.0;
    std::vector<BusId> buses;
    std::vector<Element> elements;
    std::vector<BusId> injections;
    std::string description;

    double omega1() const { return 2.0 * M_PI * f_base_hz; }

    int bus_index(const BusId& id) const {
        auto it = std::find(buses.begin(), buses.end(), id);
        return it == buses.end() ? -1 : static_cast<int>(it - buses.begin());
    }

    const Element* find_element(const std::string& name) const {
        for (const auto& e : elements)
            if (e.name == name) return &e;
        return nullptr;
    }
};

struct Violation {
    std::string element; // element name or "model"
    std::string field;
    std::string message;
};

namespace detail {

using nlohmann::json;

inline double get_num(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key))
        throw Error("parse.missing_field", ctx + ": missing required field '" + key + "'");
    if (!j.at(key).is_number())
        throw Error("parse.syntax", ctx + ": field '" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline double get_nonneg(const json& j, const std::string& key, const std::string& ctx) {
    const double v = get_num(j, key, ctx);
    if (v < 0.0)
        throw Error("parse.unit", ctx + ": field '" + key + "' must be >= 0, got " +
                                      std::to_string(v));
    return v;
}

inline std::string get_str(const json& j, const std::string& key, const std::string& ctx) {
    if (!j.contains(key))
        throw Error("parse.missing_field", ctx + ": missing required field '" + key + "'");
    if (!j.at(key).is_string())
        throw Error("parse.syntax", ctx + ": field '" + key + "' must be a string");
    return j.at(key).get<std::string>();
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                           const std::string& ctx) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* a : allowed)
            if (it.key() == a) { known = true; break; }
        if (!known)
            throw Error("parse.unknown_key", ctx + ": unknown key '" + it.key() + "'");
    }
}

inline OperatingPoint parse_operating_point(const json& j, const std::string& ctx) {
    reject_unknown(j, {"v0_q", "v0_d", "ic0_q", "ic0_d", "theta0"}, ctx);
    OperatingPoint op;
    op.v0_q = get_num(j, "v0_q", ctx);
    op.v0_d = j.value("v0_d", 0.0);
    op.ic0_q = j.value("ic0_q", 0.0);
    op.ic0_d = j.value("ic0_d", 0.0);
    op.theta0 = j.value("theta0", 0.0);
    return op;
}

inline VscParams parse_vsc_params(const json& j, const std::string& ctx) {
    reject_unknown(j,
                   {"kp_pll", "ki_pll", "kp_ol", "ki_ol", "kp_olq", "ki_olq", "kp_il", "ki_il",
                    "tau_ffv", "tau_sw", "q_d", "r_c", "l_c", "v_nom_peak", "operating_point"},
                   ctx);
    VscParams p;
    p.kp_pll = get_num(j, "kp_pll", ctx);
    p.ki_pll = get_num(j, "ki_pll", ctx);
    p.kp_ol = get_num(j, "kp_ol", ctx);
    p.ki_ol = get_num(j, "ki_ol", ctx);
    if (j.contains("kp_olq")) p.kp_olq = get_num(j, "kp_olq", ctx);
    if (j.contains("ki_olq")) p.ki_olq = get_num(j, "ki_olq", ctx);
    p.kp_il = get_num(j, "kp_il", ctx);
    p.ki_il = get_num(j, "ki_il", ctx);
    p.tau_ffv = get_nonneg(j, "tau_ffv", ctx);
    p.tau_sw = get_nonneg(j, "tau_sw", ctx);
    p.q_d = get_nonneg(j, "q_d", ctx);
    p.r_c = get_nonneg(j, "r_c", ctx);
    p.l_c = get_nonneg(j, "l_c", ctx);
    if (j.contains("operating_point")) {
        p.operating_point = parse_operating_point(j.at("operating_point"), ctx + ".operating_point");
    } else if (j.contains("v_nom_peak")) {
        // no-load default: PLL locked, converter frame aligned, zero current
        p.operating_point = OperatingPoint{get_num(j, "v_nom_peak", ctx), 0.0, 0.0, 0.0, 0.0};
    } else {
        throw Error("parse.missing_field",
                    ctx + ": needs either 'operating_point' or 'v_nom_peak'");
    }
    return p;
}

inline json dump_operating_point(const OperatingPoint& op) {
    return json{{"v0_q", op.v0_q}, {"v0_d", op.v0_d},  {"ic0_q", op.ic0_q},
                {"ic0_d", op.ic0_d}, {"theta0", op.theta0}};
}

inline json dump_vsc_params(const VscParams& p) {
    json j{{"kp_pll", p.kp_pll}, {"ki_pll", p.ki_pll}, {"kp_ol", p.kp_ol}, {"ki_ol", p.ki_ol},
           {"kp_il", p.kp_il},   {"ki_il", p.ki_il},   {"tau_ffv", p.tau_ffv},
           {"tau_sw", p.tau_sw}, {"q_d", p.q_d},       {"r_c", p.r_c},     {"l_c", p.l_c},
           {"operating_point", dump_operating_point(p.operating_point)}};
    if (p.kp_olq) j["kp_olq"] = *p.kp_olq;
    if (p.ki_olq) j["ki_olq"] = *p.ki_olq;
    return j;
}

} // namespace detail

/// Parse a network document in the published JSON schema. Throws Error with
/// codes parse.* on any schema, reference, or unit problem; the returned
/// model always satisfies the structural invariants checked by validate().
inline NetworkModel parse_network(const std::string& text) {
    using detail::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error("parse.syntax", std::string("document is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw Error("parse.syntax", "top level must be a JSON object");
    detail::reject_unknown(j, {"description", "f_base_hz", "buses", "elements", "injections"},
                           "top level");

    NetworkModel model;
    model.description = j.value("description", std::string());
    model.f_base_hz = detail::get_num(j, "f_base_hz", "top level");
    if (model.f_base_hz <= 0.0)
        throw Error("parse.unit", "f_base_hz must be > 0");

    if (!j.contains("buses") || !j.at("buses").is_array())
        throw Error("parse.missing_field", "top level: missing 'buses' array");
    for (const auto& b : j.at("buses")) {
        if (!b.is_string()) throw Error("parse.syntax", "bus ids must be strings");
        const auto id = b.get<std::string>();
        if (id == kGroundBus)
            throw Error("parse.syntax", "'ground' is a reserved terminal name, not a bus id");
        if (model.bus_index(id) >= 0)
            throw Error("parse.syntax", "duplicate bus id '" + id + "'");
        model.buses.push_back(id);
    }

    auto require_bus = [&](const std::string& id, const std::string& ctx, bool allow_ground) {
        if (allow_ground && id == kGroundBus) return;
        if (model.bus_index(id) < 0)
            throw Error("parse.unknown_bus", ctx + ": unknown bus '" + id + "'");
    };

    if (!j.contains("elements") || !j.at("elements").is_array())
        throw Error("parse.missing_field", "top level: missing 'elements' array");
    int k = 0;
    for (const auto& ej : j.at("elements")) {
        const std::string ctx = "elements[" + std::to_string(k) + "]";
        if (!ej.is_object()) throw Error("parse.syntax", ctx + ": element must be an object");
        const std::string kind = detail::get_str(ej, "kind", ctx);
        Element el;
        el.name = ej.value("name", "e" + std::to_string(k));
        if (model.find_element(el.name) != nullptr)
            throw Error("parse.syntax", ctx + ": duplicate element name '" + el.name + "'");

        if (kind == "rl_series") {
            detail::reject_unknown(ej, {"kind", "name", "from", "to", "r", "l"}, ctx);
            RlSeries e{detail::get_str(ej, "from", ctx), detail::get_str(ej, "to", ctx),
                       detail::get_nonneg(ej, "r", ctx), detail::get_nonneg(ej, "l", ctx)};
            require_bus(e.from, ctx, false);
            require_bus(e.to, ctx, true);
            el.body = e;
        } else if (kind == "shunt_cap") {
            detail::reject_unknown(ej, {"kind", "name", "bus", "c"}, ctx);
            ShuntCap e{detail::get_str(ej, "bus", ctx), detail::get_nonneg(ej, "c", ctx)};
            require_bus(e.bus, ctx, false);
            el.body = e;
        } else if (kind == "pi_cable") {
            detail::reject_unknown(ej, {"kind", "name", "from", "to", "r", "l", "c_total"}, ctx);
            PiCable e{detail::get_str(ej, "from", ctx), detail::get_str(ej, "to", ctx),
                      detail::get_nonneg(ej, "r", ctx), detail::get_nonneg(ej, "l", ctx),
                      detail::get_nonneg(ej, "c_total", ctx)};
            require_bus(e.from, ctx, false);
            require_bus(e.to, ctx, false);
            el.body = e;
        } else if (kind == "transformer") {
            detail::reject_unknown(ej, {"kind", "name", "from", "to", "r", "l"}, ctx);
            Transformer e{detail::get_str(ej, "from", ctx), detail::get_str(ej, "to", ctx),
                          detail::get_nonneg(ej, "r", ctx), detail::get_nonneg(ej, "l", ctx)};
            require_bus(e.from, ctx, false);
            require_bus(e.to, ctx, false);
            if (e.from == e.to)
                throw Error("parse.syntax", ctx + ": transformer endpoints must differ");
            el.body = e;
        } else if (kind == "grid_equivalent") {
            detail::reject_unknown(ej, {"kind", "name", "bus", "r", "l"}, ctx);
            GridEquivalent e{detail::get_str(ej, "bus", ctx), detail::get_nonneg(ej, "r", ctx),
                             detail::get_nonneg(ej, "l", ctx)};
            require_bus(e.bus, ctx, false);
            el.body = e;
        } else if (kind == "vsc") {
            detail::reject_unknown(ej, {"kind", "name", "bus", "params"}, ctx);
            if (!ej.contains("params"))
                throw Error("parse.missing_field", ctx + ": missing 'params'");
            Vsc e{detail::get_str(ej, "bus", ctx),
                  detail::parse_vsc_params(ej.at("params"), ctx + ".params")};
            require_bus(e.bus, ctx, false);
            el.body = e;
        } else if (kind == "aggregated_vsc") {
            detail::reject_unknown(
                ej, {"kind", "name", "bus", "params", "shunt_c", "series_r", "series_l"}, ctx);
            if (!ej.contains("params"))
                throw Error("parse.missing_field", ctx + ": missing 'params'");
            AggregatedVsc e{detail::get_str(ej, "bus", ctx),
                            detail::parse_vsc_params(ej.at("params"), ctx + ".params"),
                            detail::get_nonneg(ej, "shunt_c", ctx),
                            detail::get_nonneg(ej, "series_r", ctx),
                            detail::get_nonneg(ej, "series_l", ctx)};
            require_bus(e.bus, ctx, false);
            el.body = e;
        } else if (kind == "measured_table") {
            detail::reject_unknown(
                ej, {"kind", "name", "bus", "frequencies_hz", "y_qq", "y_qd", "y_dq", "y_dd"},
                ctx);
            MeasuredTable e;
            e.bus = detail::get_str(ej, "bus", ctx);
            require_bus(e.bus, ctx, false);
            if (!ej.contains("frequencies_hz") || !ej.at("frequencies_hz").is_array())
                throw Error("parse.missing_field", ctx + ": missing 'frequencies_hz' array");
            for (const auto& f : ej.at("frequencies_hz")) e.frequencies_hz.push_back(f.get<double>());
            if (e.frequencies_hz.size() < 2)
                throw Error("parse.syntax", ctx + ": measured table needs >= 2 frequencies");
            for (size_t i = 1; i < e.frequencies_hz.size(); ++i)
                if (e.frequencies_hz[i] <= e.frequencies_hz[i - 1])
                    throw Error("parse.syntax", ctx + ": frequencies_hz must be strictly increasing");
            auto entries = [&](const char* key) {
                if (!ej.contains(key) || !ej.at(key).is_array() ||
                    ej.at(key).size() != e.frequencies_hz.size())
                    throw Error("parse.missing_field",
                                ctx + ": '" + key + "' must list one [re, im] pair per frequency");
                std::vector<cplx> out;
                for (const auto& p : ej.at(key)) {
                    if (!p.is_array() || p.size() != 2)
                        throw Error("parse.syntax", ctx + ": entries of '" + key +
                                                        "' must be [re, im] pairs");
                    out.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
                }
                return out;
            };
            const auto qq = entries("y_qq"), qd = entries("y_qd"), dq = entries("y_dq"),
                       dd = entries("y_dd");
            for (size_t i = 0; i < e.frequencies_hz.size(); ++i) {
                Mat2 b;
                b << qq[i], qd[i], dq[i], dd[i];
                e.blocks.push_back(b);
            }
            el.body = e;
        } else {
            throw Error("parse.unknown_kind", ctx + ": unknown element kind '" + kind + "'");
        }
        model.elements.push_back(std::move(el));
        ++k;
    }

    if (!j.contains("injections") || !j.at("injections").is_array())
        throw Error("parse.missing_field", "top level: missing 'injections' array");
    for (const auto& b : j.at("injections")) {
        const auto id = b.get<std::string>();
        require_bus(id, "injections", false);
        model.injections.push_back(id);
    }
    if (model.injections.empty())
        throw Error("parse.missing_field", "at least one injection bus is required");

    return model;
}

/// Canonical JSON encoding; parse_network(serialize_network(m)) reproduces m.
inline std::string serialize_network(const NetworkModel& model) {
    using detail::json;
    json j;
    if (!model.description.empty()) j["description"] = model.description;
    j["f_base_hz"] = model.f_base_hz;
    j["buses"] = model.buses;
    json els = json::array();
    for (const auto& el : model.elements) {
        json e{{"kind", el.kind()}, {"name", el.name}};
        std::visit(
            [&](const auto& b) {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, RlSeries>) {
                    e["from"] = b.from; e["to"] = b.to; e["r"] = b.r; e["l"] = b.l;
                } else if constexpr (std::is_same_v<T, ShuntCap>) {
                    e["bus"] = b.bus; e["c"] = b.c;
                } else if constexpr (std::is_same_v<T, PiCable>) {
                    e["from"] = b.from; e["to"] = b.to; e["r"] = b.r; e["l"] = b.l;
                    e["c_total"] = b.c_total;
                } else if constexpr (std::is_same_v<T, Transformer>) {
                    e["from"] = b.from; e["to"] = b.to; e["r"] = b.r; e["l"] = b.l;
                } else if constexpr (std::is_same_v<T, GridEquivalent>) {
                    e["bus"] = b.bus; e["r"] = b.r; e["l"] = b.l;
                } else if constexpr (std::is_same_v<T, Vsc>) {
                    e["bus"] = b.bus; e["params"] = detail::dump_vsc_params(b.params);
                } else if constexpr (std::is_same_v<T, AggregatedVsc>) {
                    e["bus"] = b.bus; e["params"] = detail::dump_vsc_params(b.params);
                    e["shunt_c"] = b.shunt_c; e["series_r"] = b.series_r;
                    e["series_l"] = b.series_l;
                } else if constexpr (std::is_same_v<T, MeasuredTable>) {
                    e["bus"] = b.bus;
                    e["frequencies_hz"] = b.frequencies_hz;
                    json qq = json::array(), qd = json::array(), dq = json::array(),
                         dd = json::array();
                    for (const auto& m : b.blocks) {
                        qq.push_back({m(0, 0).real(), m(0, 0).imag()});
                        qd.push_back({m(0, 1).real(), m(0, 1).imag()});
                        dq.push_back({m(1, 0).real(), m(1, 0).imag()});
                        dd.push_back({m(1, 1).real(), m(1, 1).imag()});
                    }
                    e["y_qq"] = qq; e["y_qd"] = qd; e["y_dq"] = dq; e["y_dd"] = dd;
                }
            },
            el.body);
        els.push_back(e);
    }
    j["elements"] = els;
    j["injections"] = model.injections;
    return j.dump(2);
}

/// FNV-1a hash of the canonical serialization; identifies the exact model a
/// report was produced from.
inline std::string model_fingerprint(const NetworkModel& model) {
    const std::string text = serialize_network(model);
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Structural invariant check. Violations are data, not failures: an empty
/// result means the model is well formed.
inline std::vector<Violation> validate(const NetworkModel& model) {
    std::vector<Violation> out;
    if (model.f_base_hz <= 0.0)
        out.push_back({"model", "f_base_hz", "base frequency must be > 0"});
    if (model.injections.empty())
        out.push_back({"model", "injections", "at least one Norton injection bus is required"});
    for (const auto& b : model.injections)
        if (model.bus_index(b) < 0)
            out.push_back({"model", "injections", "unknown injection bus '" + b + "'"});

    auto check_bus = [&](const Element& el, const char* field, const BusId& id,
                         bool allow_ground) {
        if (allow_ground && id == kGroundBus) return;
        if (model.bus_index(id) < 0)
            out.push_back({el.name, field, "references undeclared bus '" + id + "'"});
    };
    auto check_nonneg = [&](const Element& el, const char* field, double v) {
        if (v < 0.0)
            out.push_back({el.name, field, "must be >= 0, is " + std::to_string(v)});
        if (!std::isfinite(v))
            out.push_back({el.name, field, "must be finite"});
    };

    for (const auto& el : model.elements) {
        std::visit(
            [&](const auto& b) {
                using T = std::decay_t<decltype(b)>;
                if constexpr (std::is_same_v<T, RlSeries>) {
                    check_bus(el, "from", b.from, false);
                    check_bus(el, "to", b.to, true);
                    check_nonneg(el, "r", b.r);
                    check_nonneg(el, "l", b.l);
                    if (b.from == b.to)
                        out.push_back({el.name, "to", "series branch endpoints must differ"});
                } else if constexpr (std::is_same_v<T, ShuntCap>) {
                    check_bus(el, "bus", b.bus, false);
                    check_nonneg(el, "c", b.c);
                } else if constexpr (std::is_same_v<T, PiCable>) {
                    check_bus(el, "from", b.from, false);
                    check_bus(el, "to", b.to, false);
                    check_nonneg(el, "r", b.r);
                    check_nonneg(el, "l", b.l);
                    check_nonneg(el, "c_total", b.c_total);
                    if (b.from == b.to)
                        out.push_back({el.name, "to", "cable endpoints must differ"});
                } else if constexpr (std::is_same_v<T, Transformer>) {
                    check_bus(el, "from", b.from, false);
                    check_bus(el, "to", b.to, false);
                    check_nonneg(el, "r", b.r);
                    check_nonneg(el, "l", b.l);
                    if (b.from == b.to)
                        out.push_back({el.name, "to", "transformer endpoints must differ"});
                } else if constexpr (std::is_same_v<T, GridEquivalent>) {
                    check_bus(el, "bus", b.bus, false);
                    check_nonneg(el, "r", b.r);
                    check_nonneg(el, "l", b.l);
                } else if constexpr (std::is_same_v<T, Vsc> || std::is_same_v<T, AggregatedVsc>) {
                    check_bus(el, "bus", b.bus, false);
                    const VscParams& p = b.params;
                    if (p.kp_il <= 0.0)
                        out.push_back({el.name, "kp_il", "inner-loop kp must be > 0"});
                    if (p.ki_il <= 0.0)
                        out.push_back({el.name, "ki_il", "inner-loop ki must be > 0"});
                    for (auto [field, v] :
                         {std::pair{"kp_pll", p.kp_pll}, {"ki_pll", p.ki_pll},
                          {"kp_ol", p.kp_ol}, {"ki_ol", p.ki_ol}, {"kp_il", p.kp_il},
                          {"ki_il", p.ki_il}})
                        if (!std::isfinite(v))
                            out.push_back({el.name, field, "gain must be finite"});
                    check_nonneg(el, "tau_ffv", p.tau_ffv);
                    check_nonneg(el, "tau_sw", p.tau_sw);
                    check_nonneg(el, "q_d", p.q_d);
                    check_nonneg(el, "r_c", p.r_c);
                    check_nonneg(el, "l_c", p.l_c);
                    if constexpr (std::is_same_v<T, AggregatedVsc>) {
                        check_nonneg(el, "shunt_c", b.shunt_c);
                        check_nonneg(el, "series_r", b.series_r);
                        check_nonneg(el, "series_l", b.series_l);
                    }
                } else if constexpr (std::is_same_v<T, MeasuredTable>) {
                    check_bus(el, "bus", b.bus, false);
                    if (b.frequencies_hz.size() != b.blocks.size())
                        out.push_back({el.name, "frequencies_hz", "table length mismatch"});
                }
            },
            el.body);
    }
    return out;
}

} // namespace gridmodes
