#pragma once

// Generalized Nyquist comparator. The open loop L(s) = Z_N(s) * Y_S(s) is
// swept along the positive jw axis, its eigenvalues tracked into loci with
// the same eigenvector matcher the modal sweep uses (branch swaps would
// corrupt winding counts), mirrored to negative frequencies by conjugation,
// and closed. The verdict counts net clockwise encirclements of (-1, 0) and
// is only meaningful when the open loop has no right-half-plane poles; the
// report carries that caveat instead of trying to verify it.

#include "gridmodes/assembly.hpp"
#include "gridmodes/eig.hpp"
#include "gridmodes/modal.hpp"
#include "gridmodes/pmd.hpp"
#include "gridmodes/tracking.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace gridmodes {

struct LocusPoint {
    double f_hz = 0.0; // signed; negative half is the conjugate mirror
    cplx value;
};

struct EigenLocus {
    int id = 0;
    std::vector<LocusPoint> points; // ordered by contour parameter (f ascending)
    int encirclements_cw = 0;       // net clockwise turns around (-1, 0)
    bool any_ambiguous = false;
};

struct GncConfig {
    double closure_magnitude = 0.1; // required max |lambda| at f_max before closing
    int max_extensions = 3;         // each extension doubles f_max (coarser step)
    double zn_rcond_floor = 1e-12;  // Z_N samples below this are skipped
    // the contour also descends below f_min (halving) until the loop settles
    // to its f -> 0 limit, so the gap across zero closes with a short chord
    double low_end_rel_tol = 0.01;
    double f_low_floor_hz = 1e-5;
};

struct GncResult {
    SystemVerdict verdict = SystemVerdict::stable;
    int total_clockwise = 0;
    std::vector<EigenLocus> loci;
    std::vector<std::string> caveats;
    std::vector<std::pair<double, double>> skipped; // (f_hz, rcond) of skipped samples
    double f_max_used_hz = 0.0;
    std::string model_fingerprint;
};

/// Winding number of a closed locus around (-1, 0), clockwise positive.
/// Accumulates the argument increment between consecutive points and rounds
/// the total to an integer; the locus is closed by wrapping to the first
/// point. Throws gnc.marginal_crossing when a point sits on the critical
/// point itself.
inline int count_encirclements(const EigenLocus& locus) {
    const cplx critical(-1.0, 0.0);
    const auto& pts = locus.points;
    if (pts.size() < 3) return 0;
    double acc = 0.0;
    cplx prev = pts.back().value - critical; // wrap: last -> first closes the contour
    if (std::abs(prev) < 1e-12)
        throw Error("gnc.marginal_crossing", "locus passes through (-1, 0)");
    for (const auto& p : pts) {
        const cplx cur = p.value - critical;
        if (std::abs(cur) < 1e-12)
            throw Error("gnc.marginal_crossing", "locus passes through (-1, 0)");
        acc += std::arg(cur / prev);
        prev = cur;
    }
    return -static_cast<int>(std::lround(acc / (2.0 * M_PI))); // clockwise positive
}

namespace detail {

struct OpenLoopSample {
    double f_hz;
    VecX values;
    MatX right;
    MatX left;
};

inline std::optional<OpenLoopSample> open_loop_at(const NetworkModel& model, double f_hz,
                                                  double rcond_floor,
                                                  std::vector<std::pair<double, double>>& skipped) {
    const cplx s(0.0, 2.0 * M_PI * f_hz);
    SystemMatrices sm = assemble(model, s);
    const MatX& zn = sm.z_n();
    if (!(sm.zn_rcond > rcond_floor)) {
        skipped.emplace_back(f_hz, sm.zn_rcond);
        return std::nullopt;
    }
    const MatX l_mat = zn * sm.y_s;
    EigDecomposition d = eig_complex(l_mat);
    return OpenLoopSample{f_hz, d.values, d.right, d.left};
}

} // namespace detail

/// Sweep the open loop over the grid and assemble closed, mirrored eigenloci.
/// Near-singular Y_N samples are skipped (recorded in `skipped`); the sweep
/// auto-extends beyond f_max with a coarser step until the loop magnitude is
/// small enough to close, or the extension budget runs out (caveat).
inline GncResult open_loop_sweep(const NetworkModel& model, const FrequencyGrid& grid,
                                 const GncConfig& cfg = {}) {
    grid.check();
    GncResult result;
    result.model_fingerprint = model_fingerprint(model);

    std::vector<detail::OpenLoopSample> samples;
    MatX prev_left;
    VecX prev_values;
    auto track_into = [&](detail::OpenLoopSample&& smp) {
        const int m = static_cast<int>(smp.values.size());
        if (samples.empty()) {
            samples.push_back(std::move(smp));
            prev_left = samples.back().left;
            prev_values = samples.back().values;
            return;
        }
        TrackStep step = match_modes(prev_left, prev_values, smp.right, smp.values);
        // permute sample columns into trace order so loci read off directly
        detail::OpenLoopSample ordered;
        ordered.f_hz = smp.f_hz;
        ordered.values.resize(m);
        ordered.right.resize(smp.right.rows(), smp.right.cols());
        ordered.left.resize(smp.left.rows(), smp.left.cols());
        for (int t = 0; t < m; ++t) {
            const int j = step.assignment[static_cast<size_t>(t)];
            ordered.values(t) = smp.values(j);
            ordered.right.col(t) = smp.right.col(j);
            ordered.left.row(t) = smp.left.row(j);
        }
        samples.push_back(std::move(ordered));
        prev_left = samples.back().left;
        prev_values = samples.back().values;
        if (result.loci.empty()) result.loci.resize(static_cast<size_t>(m));
        for (int t = 0; t < m; ++t)
            result.loci[static_cast<size_t>(t)].any_ambiguous =
                result.loci[static_cast<size_t>(t)].any_ambiguous ||
                step.ambiguous[static_cast<size_t>(t)];
    };

    for (const double f : grid.base_frequencies()) {
        auto smp = detail::open_loop_at(model, f, cfg.zn_rcond_floor, result.skipped);
        if (smp) track_into(std::move(*smp));
    }
    if (samples.empty())
        throw Error("gnc.no_samples", "every Y_N sample was singular; no open loop to assess");

    // low-frequency descent: halve below f_min until the eigenvalues settle,
    // so the contour's crossing of f = 0 is represented by a short chord
    {
        std::vector<detail::OpenLoopSample> low;
        MatX prev_left_low = samples.front().left;
        VecX prev_vals_low = samples.front().values;
        const int m = static_cast<int>(prev_vals_low.size());
        double rel = std::numeric_limits<double>::infinity();
        double f = samples.front().f_hz;
        while (f * 0.5 >= cfg.f_low_floor_hz && rel > cfg.low_end_rel_tol) {
            f *= 0.5;
            std::optional<detail::OpenLoopSample> smp;
            try {
                smp = detail::open_loop_at(model, f, cfg.zn_rcond_floor, result.skipped);
            } catch (const Error& e) {
                result.caveats.push_back("low-frequency descent stopped at " +
                                         std::to_string(f) + " Hz: " + e.what());
                break;
            }
            if (!smp) continue;
            const TrackStep step =
                match_modes(prev_left_low, prev_vals_low, smp->right, smp->values);
            detail::OpenLoopSample ordered;
            ordered.f_hz = smp->f_hz;
            ordered.values.resize(m);
            ordered.right.resize(smp->right.rows(), smp->right.cols());
            ordered.left.resize(smp->left.rows(), smp->left.cols());
            rel = 0.0;
            for (int t = 0; t < m; ++t) {
                const int j = step.assignment[static_cast<size_t>(t)];
                ordered.values(t) = smp->values(j);
                ordered.right.col(t) = smp->right.col(j);
                ordered.left.row(t) = smp->left.row(j);
                rel = std::max(rel, std::abs(ordered.values(t) - prev_vals_low(t)) /
                                        (1.0 + std::abs(ordered.values(t))));
            }
            prev_left_low = ordered.left;
            prev_vals_low = ordered.values;
            low.push_back(std::move(ordered));
        }
        if (rel > cfg.low_end_rel_tol && !std::isinf(rel))
            result.caveats.push_back(
                "open loop did not settle toward f = 0 (relative step " + std::to_string(rel) +
                "); the zero-crossing chord may miscount");
        samples.insert(samples.begin(), low.rbegin(), low.rend());
    }

    // high-frequency closure: extend until the loop has decayed
    double f_top = samples.back().f_hz;
    int extensions = 0;
    auto top_magnitude = [&]() { return samples.back().values.cwiseAbs().maxCoeff(); };
    while (top_magnitude() >= cfg.closure_magnitude && extensions < cfg.max_extensions) {
        const double f_start = f_top;
        const double f_stop = 2.0 * f_top;
        const double step = grid.step_hz * 4.0 * std::pow(2.0, extensions);
        for (double f = f_start + step; f <= f_stop + 0.5 * step; f += step) {
            auto smp = detail::open_loop_at(model, f, cfg.zn_rcond_floor, result.skipped);
            if (smp) track_into(std::move(*smp));
        }
        f_top = samples.back().f_hz;
        ++extensions;
    }
    result.f_max_used_hz = f_top;
    if (top_magnitude() >= cfg.closure_magnitude)
        result.caveats.push_back("open loop magnitude " + std::to_string(top_magnitude()) +
                                 " at " + std::to_string(f_top) +
                                 " Hz still above the closure threshold; encirclement counts "
                                 "may miss high-frequency turns");

    const int m = static_cast<int>(samples.front().values.size());
    if (result.loci.empty()) result.loci.resize(static_cast<size_t>(m));
    for (int t = 0; t < m; ++t) {
        EigenLocus& locus = result.loci[static_cast<size_t>(t)];
        locus.id = t;
        locus.points.clear();
        locus.points.reserve(2 * samples.size());
        // negative half first (conjugate mirror, ascending contour parameter)
        for (auto it = samples.rbegin(); it != samples.rend(); ++it)
            locus.points.push_back({-it->f_hz, std::conj(it->values(t))});
        for (const auto& smp : samples) locus.points.push_back({smp.f_hz, smp.values(t)});
    }
    return result;
}

/// Full comparator: sweep, count, and attach the standing validity caveat.
inline GncResult gnc_assess(const NetworkModel& model, const FrequencyGrid& grid,
                            const GncConfig& cfg = {}) {
    GncResult result = open_loop_sweep(model, grid, cfg);
    int total = 0;
    for (auto& locus : result.loci) {
        locus.encirclements_cw = count_encirclements(locus);
        total += locus.encirclements_cw;
    }
    result.total_clockwise = total;
    result.verdict = total > 0 ? SystemVerdict::unstable : SystemVerdict::stable;
    result.caveats.push_back(
        "verdict assumes the open loop Z_N*Y_S has no right-half-plane poles; aggregated "
        "subsystems can violate this (cross-check groupings against the ungrouped model)");
    if (total < 0)
        result.caveats.push_back(
            "net counterclockwise encirclements found; with a pole-free open loop this cannot "
            "happen, so the no-RHP-pole assumption is suspect");
    return result;
}

/// loci.csv encoding: one row per (locus, contour point).
inline std::string loci_to_csv(const GncResult& r) {
    std::string out = "f_hz,locus_id,re,im\n";
    char buf[128];
    for (const auto& locus : r.loci) {
        for (const auto& p : locus.points) {
            std::snprintf(buf, sizeof(buf), "%.10g,%d,%.12g,%.12g\n", p.f_hz, locus.id,
                          p.value.real(), p.value.imag());
            out += buf;
        }
    }
    return out;
}

} // namespace gridmodes
