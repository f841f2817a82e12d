#pragma once

// Positive-mode-damping assessment. Every tracked modal-impedance trace is
// scanned for magnitude peaks; at each peak the imaginary part's zero
// crossing is located, and the mode verdict follows the sign of
// Re{lambda_z}(w_x) * k_x, where k_x is the imaginary part's slope at the
// crossing: negative product = positively damped, positive = unstable. Both
// slope directions are assessed, since converter control can invert the
// usual inductive-to-capacitive behaviour.

#include "gridmodes/modal.hpp"
#include "gridmodes/peaks.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace gridmodes {

enum class ModeVerdict { stable, unstable, marginal, non_resonant };
enum class SystemVerdict { stable, unstable, marginal };

inline const char* to_string(ModeVerdict v) {
    switch (v) {
        case ModeVerdict::stable: return "stable";
        case ModeVerdict::unstable: return "unstable";
        case ModeVerdict::marginal: return "marginal";
        default: return "non_resonant";
    }
}

inline const char* to_string(SystemVerdict v) {
    switch (v) {
        case SystemVerdict::stable: return "stable";
        case SystemVerdict::unstable: return "unstable";
        default: return "marginal";
    }
}

struct PmdConfig {
    double prominence_factor = 3.0;  // peak prominence >= factor * trace median magnitude
    double crossing_window_hz = 50.0; // zero-crossing search window around a peak
    double marginal_tol = 1e-9;       // band for Re * k_x treated as numerically zero
};

struct ResonancePoint {
    int mode_id = 0;
    double f_peak_hz = 0.0;
    double f_x_hz = 0.0;     // Im{lambda_z} zero crossing nearest the peak
    double re_at_x = 0.0;    // Re{lambda_z}(j w_x), Ohm
    double k_x = 0.0;        // d Im{lambda_z} / d omega at w_x, Ohm s/rad
    ModeVerdict verdict = ModeVerdict::non_resonant;
    std::optional<double> sigma_estimate; // re_at_x / k_x, 1/s
    bool low_confidence = false;          // tracking was ambiguous/degenerate nearby
    std::string diagnostic;
};

struct StabilityReport {
    SystemVerdict verdict = SystemVerdict::stable;
    std::vector<ResonancePoint> points;
    std::vector<std::string> notes; // non-assessable traces etc.
    std::string model_fingerprint;
    FrequencyGrid grid;
};

/// Peak frequencies of |lambda_z| along a trace, interior maxima only.
inline std::vector<double> find_peaks(const ModeTrace& trace, double min_prominence) {
    std::vector<double> out;
    for (const auto& pk : find_series_peaks(trace.magnitudes(), min_prominence))
        out.push_back(trace.samples[pk.index].f_hz);
    return out;
}

/// Assess one detected peak: bracket the Im zero crossing nearest the peak
/// within the window, interpolate f_x and Re{lambda_z}, difference the slope,
/// and classify. When several crossings lie in the window the one closest to
/// the peak is used.
inline ResonancePoint resonance_point(const ModeTrace& trace, double f_peak_hz,
                                      double window_hz, double marginal_tol = 1e-9) {
    ResonancePoint rp;
    rp.mode_id = trace.id;
    rp.f_peak_hz = f_peak_hz;

    const auto& smp = trace.samples;
    struct Crossing {
        double f_x, re_x, k_x;
    };
    std::optional<Crossing> best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < smp.size(); ++i) {
        const auto& a = smp[i];
        const auto& b = smp[i + 1];
        if (a.singular || b.singular) continue;
        if (a.f_hz < f_peak_hz - window_hz || b.f_hz > f_peak_hz + window_hz) continue;
        const double ya = a.lambda_z.imag(), yb = b.lambda_z.imag();
        if (ya == 0.0 && yb == 0.0) continue;
        if (!((ya <= 0.0 && yb > 0.0) || (ya >= 0.0 && yb < 0.0) || (ya > 0.0 && yb <= 0.0) ||
              (ya < 0.0 && yb >= 0.0)))
            continue;
        if (ya == yb) continue;
        const double t = -ya / (yb - ya);
        if (t < 0.0 || t > 1.0) continue;
        Crossing c;
        c.f_x = a.f_hz + t * (b.f_hz - a.f_hz);
        c.re_x = a.lambda_z.real() + t * (b.lambda_z.real() - a.lambda_z.real());
        c.k_x = (yb - ya) / ((b.f_hz - a.f_hz) * 2.0 * M_PI);
        if (a.ambiguous || b.ambiguous) rp.low_confidence = true;
        const double dist = std::abs(c.f_x - f_peak_hz);
        if (dist < best_dist) {
            best_dist = dist;
            best = c;
        }
    }
    if (trace.any_degenerate) rp.low_confidence = true;

    if (!best) {
        rp.verdict = ModeVerdict::non_resonant;
        rp.diagnostic = "no Im{lambda_z} zero crossing within " + std::to_string(window_hz) +
                        " Hz of the " + std::to_string(f_peak_hz) + " Hz peak";
        return rp;
    }
    rp.f_x_hz = best->f_x;
    rp.re_at_x = best->re_x;
    rp.k_x = best->k_x;
    const double product = rp.re_at_x * rp.k_x;
    if (product > marginal_tol)
        rp.verdict = ModeVerdict::unstable;
    else if (product < -marginal_tol)
        rp.verdict = ModeVerdict::stable;
    else
        rp.verdict = ModeVerdict::marginal;
    if (rp.k_x != 0.0) rp.sigma_estimate = rp.re_at_x / rp.k_x;
    return rp;
}

/// Run the criterion over every trace of a sweep and aggregate.
inline StabilityReport pmd_assess(const SweepResult& sweep, const PmdConfig& cfg = {}) {
    StabilityReport report;
    report.model_fingerprint = model_fingerprint(sweep.model);
    report.grid = sweep.grid;

    bool any_unstable = false, any_marginal = false;
    for (const auto& trace : sweep.traces) {
        if (trace.samples.size() < 3) {
            report.notes.push_back("mode " + std::to_string(trace.id) +
                                   ": too few samples to assess");
            continue;
        }
        bool all_singular = true;
        for (const auto& s : trace.samples) all_singular = all_singular && s.singular;
        if (all_singular) {
            report.notes.push_back("mode " + std::to_string(trace.id) +
                                   ": admittance eigenvalue underflows across the sweep "
                                   "(singular Y_T); not assessable");
            continue;
        }
        const auto mags = trace.magnitudes();
        const double prominence = cfg.prominence_factor * series_median(mags);
        for (const double f_pk : find_peaks(trace, prominence)) {
            ResonancePoint rp =
                resonance_point(trace, f_pk, cfg.crossing_window_hz, cfg.marginal_tol);
            any_unstable = any_unstable || rp.verdict == ModeVerdict::unstable;
            any_marginal = any_marginal || rp.verdict == ModeVerdict::marginal;
            report.points.push_back(std::move(rp));
        }
    }
    report.verdict = any_unstable ? SystemVerdict::unstable
                                  : (any_marginal ? SystemVerdict::marginal
                                                  : SystemVerdict::stable);
    return report;
}

} // namespace gridmodes
