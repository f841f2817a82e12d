#pragma once

// Report serialization: the machine-readable report.json document and the
// human-readable verdict table printed by the CLI.

#include "gridmodes/gnc.hpp"
#include "gridmodes/pmd.hpp"

#include <json.hpp>

#include <cstdio>
#include <optional>
#include <string>

namespace gridmodes {

namespace detail {

// fixed-precision number boxing so report.json is byte-stable across runs
inline nlohmann::json num(double v) {
    if (!std::isfinite(v)) return nlohmann::json(); // null
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return nlohmann::json::parse(buf);
}

} // namespace detail

inline nlohmann::json grid_to_json(const FrequencyGrid& g) {
    return nlohmann::json{{"f_min_hz", detail::num(g.f_min_hz)},
                          {"f_max_hz", detail::num(g.f_max_hz)},
                          {"step_hz", detail::num(g.step_hz)},
                          {"refine_factor", g.refine_factor},
                          {"refine_window_hz", detail::num(g.refine_window_hz)}};
}

inline nlohmann::json pmd_report_to_json(const StabilityReport& r) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& p : r.points) {
        nlohmann::json m{{"mode_id", p.mode_id},
                         {"f_peak_hz", detail::num(p.f_peak_hz)},
                         {"verdict", to_string(p.verdict)}};
        if (p.verdict != ModeVerdict::non_resonant) {
            m["f_x_hz"] = detail::num(p.f_x_hz);
            m["re_at_x_ohm"] = detail::num(p.re_at_x);
            m["k_x_ohm_s_per_rad"] = detail::num(p.k_x);
            if (p.sigma_estimate) m["sigma_estimate_per_s"] = detail::num(*p.sigma_estimate);
        }
        if (p.low_confidence) m["low_confidence"] = true;
        if (!p.diagnostic.empty()) m["diagnostic"] = p.diagnostic;
        modes.push_back(m);
    }
    return nlohmann::json{{"verdict", to_string(r.verdict)},
                          {"modes", modes},
                          {"notes", r.notes}};
}

inline nlohmann::json gnc_result_to_json(const GncResult& r) {
    nlohmann::json loci = nlohmann::json::array();
    for (const auto& l : r.loci) {
        nlohmann::json lj{{"locus_id", l.id}, {"encirclements_cw", l.encirclements_cw}};
        if (l.any_ambiguous) lj["tracking_ambiguous"] = true;
        loci.push_back(lj);
    }
    nlohmann::json skipped = nlohmann::json::array();
    for (const auto& [f, rc] : r.skipped)
        skipped.push_back({{"f_hz", detail::num(f)}, {"zn_rcond", detail::num(rc)}});
    return nlohmann::json{{"verdict", to_string(r.verdict)},
                          {"total_clockwise", r.total_clockwise},
                          {"f_max_used_hz", detail::num(r.f_max_used_hz)},
                          {"loci", loci},
                          {"caveats", r.caveats},
                          {"skipped_samples", skipped}};
}

/// Combined report document. The overall verdict is the PMD verdict when PMD
/// ran (it assesses the closed loop and is immune to grouping artifacts),
/// otherwise the GNC verdict.
inline std::string report_to_json(const std::optional<StabilityReport>& pmd,
                                  const std::optional<GncResult>& gnc,
                                  const FrequencyGrid& grid, const std::string& fingerprint) {
    nlohmann::json j;
    j["model_fingerprint"] = fingerprint;
    j["grid"] = grid_to_json(grid);
    nlohmann::json criteria = nlohmann::json::array();
    if (pmd) criteria.push_back("pmd");
    if (gnc) criteria.push_back("gnc");
    j["criteria"] = criteria;
    if (pmd) j["pmd"] = pmd_report_to_json(*pmd);
    if (gnc) j["gnc"] = gnc_result_to_json(*gnc);
    const SystemVerdict overall = pmd ? pmd->verdict : (gnc ? gnc->verdict : SystemVerdict::stable);
    j["verdict"] = to_string(overall);
    return j.dump(2) + "\n";
}

inline std::string pmd_report_to_text(const StabilityReport& r) {
    std::string out;
    char buf[256];
    out += "mode   f_peak[Hz]      f_x[Hz]     Re@x[Ohm]  k_x[Ohm*s/rad]   sigma[1/s]  verdict\n";
    for (const auto& p : r.points) {
        if (p.verdict == ModeVerdict::non_resonant) {
            std::snprintf(buf, sizeof(buf), "%4d %12.2f %12s %13s %15s %12s  %s\n", p.mode_id,
                          p.f_peak_hz, "-", "-", "-", "-", to_string(p.verdict));
        } else {
            std::snprintf(buf, sizeof(buf), "%4d %12.2f %12.3f %13.5g %15.5g %12.4g  %s%s\n",
                          p.mode_id, p.f_peak_hz, p.f_x_hz, p.re_at_x, p.k_x,
                          p.sigma_estimate.value_or(0.0), to_string(p.verdict),
                          p.low_confidence ? " (low confidence)" : "");
        }
        out += buf;
    }
    for (const auto& n : r.notes) out += "note: " + n + "\n";
    out += std::string("system verdict (PMD): ") + to_string(r.verdict) + "\n";
    return out;
}

inline std::string gnc_result_to_text(const GncResult& r) {
    std::string out;
    char buf[128];
    for (const auto& l : r.loci) {
        std::snprintf(buf, sizeof(buf), "locus %3d: %+d clockwise%s\n", l.id,
                      l.encirclements_cw, l.any_ambiguous ? " (tracking ambiguous)" : "");
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "net clockwise encirclements: %+d\n", r.total_clockwise);
    out += buf;
    out += std::string("system verdict (GNC): ") + to_string(r.verdict) + "\n";
    for (const auto& c : r.caveats) out += "caveat: " + c + "\n";
    return out;
}

} // namespace gridmodes
