#pragma once

// Eigenvalue-to-trace assignment across sweep steps. The solver returns
// eigenvalues in an arbitrary order at every frequency; continuity is
// manufactured by matching on eigenvector overlap |T_prev * L_next| (greedy
// on the globally largest overlap), falling back to nearest-eigenvalue
// matching when the overlap matrix carries no signal. Shared by the modal
// sweep and the Nyquist locus sweep.

#include "gridmodes/types.hpp"

#include <limits>
#include <vector>

namespace gridmodes {

struct TrackStep {
    std::vector<int> assignment;   // assignment[trace] = eigen index at this step
    std::vector<double> confidence; // chosen overlap magnitude per trace
    std::vector<bool> ambiguous;    // overlap gap below the ambiguity threshold
};

/// Match the next step's eigenpairs to existing traces. prev_left/;
/// prev_values describe the traces in trace order (row i of prev_left is the
/// left vector last assigned to trace i).
inline TrackStep match_modes(const MatX& prev_left, const VecX& prev_values,
                             const MatX& next_right, const VecX& next_values,
                             double ambiguity_gap = 0.1) {
    const int n = static_cast<int>(prev_values.size());
    TrackStep step;
    step.assignment.assign(static_cast<size_t>(n), -1);
    step.confidence.assign(static_cast<size_t>(n), 0.0);
    step.ambiguous.assign(static_cast<size_t>(n), false);

    Eigen::MatrixXd overlap = (prev_left * next_right).cwiseAbs();
    std::vector<bool> row_used(static_cast<size_t>(n), false), col_used(static_cast<size_t>(n), false);

    constexpr double kOverlapFloor = 1e-9;
    int assigned = 0;
    while (assigned < n) {
        double best = -1.0;
        int bi = -1, bj = -1;
        for (int i = 0; i < n; ++i) {
            if (row_used[static_cast<size_t>(i)]) continue;
            for (int j = 0; j < n; ++j) {
                if (col_used[static_cast<size_t>(j)]) continue;
                if (overlap(i, j) > best) {
                    best = overlap(i, j);
                    bi = i;
                    bj = j;
                }
            }
        }
        if (best < kOverlapFloor) break; // no eigenvector signal left
        // gap to the runner-up in the same row, for ambiguity flagging
        double second = 0.0;
        for (int j = 0; j < n; ++j) {
            if (j == bj || col_used[static_cast<size_t>(j)]) continue;
            second = std::max(second, overlap(bi, j));
        }
        step.assignment[static_cast<size_t>(bi)] = bj;
        step.confidence[static_cast<size_t>(bi)] = best;
        step.ambiguous[static_cast<size_t>(bi)] = (best - second) < ambiguity_gap;
        row_used[static_cast<size_t>(bi)] = true;
        col_used[static_cast<size_t>(bj)] = true;
        ++assigned;
    }

    // nearest-eigenvalue fallback for anything the overlap could not place
    for (int i = 0; i < n; ++i) {
        if (step.assignment[static_cast<size_t>(i)] >= 0) continue;
        double best = std::numeric_limits<double>::infinity();
        int bj = -1;
        for (int j = 0; j < n; ++j) {
            if (col_used[static_cast<size_t>(j)]) continue;
            const double dist = std::abs(next_values(j) - prev_values(i));
            if (dist < best) {
                best = dist;
                bj = j;
            }
        }
        step.assignment[static_cast<size_t>(i)] = bj;
        step.confidence[static_cast<size_t>(i)] = 0.0;
        step.ambiguous[static_cast<size_t>(i)] = true;
        col_used[static_cast<size_t>(bj)] = true;
    }
    return step;
}

} // namespace gridmodes
