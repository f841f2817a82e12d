#pragma once

// Frequency sweep and mode tracking: decompose Y_T(jw) over a grid, invert
// eigenvalues into modal impedances, and stitch per-frequency spectra into
// continuous traces. A first pass on the base grid locates candidate
// resonance peaks; the sweep then reruns on a grid locally refined around
// them so downstream zero-crossing and slope estimates see sub-step detail.

#include "gridmodes/assembly.hpp"
#include "gridmodes/eig.hpp"
#include "gridmodes/peaks.hpp"
#include "gridmodes/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace gridmodes {

struct FrequencyGrid {
    double f_min_hz = 1.0;
    double f_max_hz = 3000.0;
    double step_hz = 1.0;
    int refine_factor = 10;          // extra samples at step/refine_factor ...
    double refine_window_hz = 20.0;  // ... in +/- this window around detected peaks
    double refine_prominence_factor = 1.0; // peak trigger: prominence >= factor * median

    bool refinement_enabled() const { return refine_factor > 1 && refine_window_hz > 0.0; }

    void check() const {
        if (!(f_min_hz > 0.0)) throw Error("grid.invalid", "f_min must be > 0");
        if (!(f_max_hz >= f_min_hz)) throw Error("grid.invalid", "f_max must be >= f_min");
        if (!(step_hz > 0.0)) throw Error("grid.invalid", "step must be > 0");
    }

    std::vector<double> base_frequencies() const {
        check();
        std::vector<double> fs;
        const long count = std::lround((f_max_hz - f_min_hz) / step_hz);
        for (long k = 0; k <= count; ++k) {
            const double f = f_min_hz + static_cast<double>(k) * step_hz;
            if (f <= f_max_hz + 1e-9 * step_hz) fs.push_back(std::min(f, f_max_hz));
        }
        if (fs.empty() || fs.back() < f_max_hz - 1e-9 * step_hz) fs.push_back(f_max_hz);
        return fs;
    }
};

struct ModeSample {
    double f_hz = 0.0;
    cplx lambda_y;
    cplx lambda_z;
    int dominant_bus = 0;
    double confidence = 1.0;
    bool ambiguous = false;
    bool singular = false; // |lambda_y| underflowed; lambda_z is not finite
};

struct ModeTrace {
    int id = 0;
    std::vector<ModeSample> samples;
    bool any_ambiguous = false;
    bool any_degenerate = false; // defective-matrix warnings seen along the trace

    std::vector<double> magnitudes() const {
        std::vector<double> m;
        m.reserve(samples.size());
        for (const auto& smp : samples) m.push_back(std::abs(smp.lambda_z));
        return m;
    }
};

struct SweepResult {
    NetworkModel model;
    FrequencyGrid grid;
    std::vector<double> frequencies;
    std::vector<ModeTrace> traces;
    int n_buses = 0;

    const ModeTrace& trace(int id) const { return traces[static_cast<size_t>(id)]; }
};

/// Single-frequency decomposition (assemble + eigendecompose), the
/// recomputation primitive used by participation queries and verification.
inline ModalDecomposition decompose_at(const NetworkModel& model, double f_hz) {
    const cplx s(0.0, 2.0 * M_PI * f_hz);
    return decompose_admittance(assemble(model, s).y_t);
}

namespace detail {

inline std::vector<ModeTrace> run_tracked_sweep(const NetworkModel& model,
                                                const std::vector<double>& fs) {
    std::vector<ModeTrace> traces;
    MatX prev_left;
    VecX prev_values;
    bool first = true;
    for (const double f : fs) {
        ModalDecomposition d;
        try {
            d = decompose_at(model, f);
        } catch (const Error& e) {
            throw Error(e.code(), "sweep at " + std::to_string(f) + " Hz: " + e.what());
        }
        const int m = d.size();
        if (first) {
            traces.resize(static_cast<size_t>(m));
            for (int i = 0; i < m; ++i) traces[static_cast<size_t>(i)].id = i;
        }
        TrackStep step;
        if (first) {
            step.assignment.resize(static_cast<size_t>(m));
            for (int i = 0; i < m; ++i) step.assignment[static_cast<size_t>(i)] = i;
            step.confidence.assign(static_cast<size_t>(m), 1.0);
            step.ambiguous.assign(static_cast<size_t>(m), false);
        } else {
            step = match_modes(prev_left, prev_values, d.right, d.lambda_y);
        }

        // reorder the step's left rows / values into trace order for the next match
        MatX left_in_trace_order(d.left.rows(), d.left.cols());
        VecX values_in_trace_order(m);
        for (int t = 0; t < m; ++t) {
            const int j = step.assignment[static_cast<size_t>(t)];
            auto& trace = traces[static_cast<size_t>(t)];
            ModeSample smp;
            smp.f_hz = f;
            smp.lambda_y = d.lambda_y(j);
            smp.lambda_z = d.lambda_z(j);
            smp.singular = !std::isfinite(std::abs(d.lambda_z(j)));
            smp.confidence = step.confidence[static_cast<size_t>(t)];
            smp.ambiguous = step.ambiguous[static_cast<size_t>(t)];
            const auto w = participation(d, j);
            smp.dominant_bus = static_cast<int>(
                std::max_element(w.begin(), w.end()) - w.begin());
            trace.any_ambiguous = trace.any_ambiguous || smp.ambiguous;
            trace.any_degenerate = trace.any_degenerate || d.defective_warning;
            trace.samples.push_back(smp);
            left_in_trace_order.row(t) = d.left.row(j);
            values_in_trace_order(t) = d.lambda_y(j);
        }
        prev_left = std::move(left_in_trace_order);
        prev_values = std::move(values_in_trace_order);
        first = false;
    }
    return traces;
}

} // namespace detail

/// Sweep the grid, track modes, and refine locally around detected |lambda_z|
/// peaks. Deterministic for a fixed model and grid.
inline SweepResult sweep(const NetworkModel& model, const FrequencyGrid& grid) {
    grid.check();
    SweepResult result;
    result.model = model;
    result.grid = grid;
    result.n_buses = static_cast<int>(model.buses.size());

    std::vector<double> fs = grid.base_frequencies();
    std::vector<ModeTrace> traces = detail::run_tracked_sweep(model, fs);

    if (grid.refinement_enabled() && fs.size() >= 3) {
        std::set<double> merged(fs.begin(), fs.end());
        const double fine = grid.step_hz / grid.refine_factor;
        bool any_new = false;
        for (const auto& trace : traces) {
            const auto mags = trace.magnitudes();
            const double floor = grid.refine_prominence_factor * series_median(mags);
            for (const auto& pk : find_series_peaks(mags, floor)) {
                const double fp = trace.samples[pk.index].f_hz;
                const double lo = std::max(grid.f_min_hz, fp - grid.refine_window_hz);
                const double hi = std::min(grid.f_max_hz, fp + grid.refine_window_hz);
                for (double f = lo; f <= hi + 0.5 * fine; f += fine) {
                    const double fv = std::min(f, grid.f_max_hz);
                    // skip values indistinguishable from existing samples
                    auto it = merged.lower_bound(fv - 0.25 * fine);
                    if (it != merged.end() && std::abs(*it - fv) <= 0.25 * fine) continue;
                    merged.insert(fv);
                    any_new = true;
                }
            }
        }
        if (any_new) {
            fs.assign(merged.begin(), merged.end());
            traces = detail::run_tracked_sweep(model, fs);
        }
    }

    result.frequencies = std::move(fs);
    result.traces = std::move(traces);
    return result;
}

/// modes.csv encoding of a sweep: one row per (frequency, mode).
inline std::string sweep_to_csv(const SweepResult& r) {
    std::string out = "f_hz,mode_id,re_lambda_z,im_lambda_z,abs_lambda_z,dominant_bus\n";
    char buf[160];
    for (size_t i = 0; i < r.frequencies.size(); ++i) {
        for (const auto& trace : r.traces) {
            const auto& smp = trace.samples[i];
            std::snprintf(buf, sizeof(buf), "%.10g,%d,%.12g,%.12g,%.12g,%d\n", smp.f_hz,
                          trace.id, smp.lambda_z.real(), smp.lambda_z.imag(),
                          std::abs(smp.lambda_z), smp.dominant_bus);
            out += buf;
        }
    }
    return out;
}

} // namespace gridmodes
