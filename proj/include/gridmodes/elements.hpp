#pragma once

// dq-frame admittance evaluators for the passive network elements. Every
// evaluator is a pure function of (parameters, fundamental frequency, complex
// frequency s); the fundamental omega1 enters through the +/- omega1*L and
// +/- omega1*C cross coupling of the rotating frame.

#include "gridmodes/types.hpp"

#include <cmath>

namespace gridmodes {

/// Series-RL impedance block [[R+Ls, w1*L], [-w1*L, R+Ls]].
inline Mat2 rl_series_impedance(double r, double l, double omega1, cplx s) {
    return dq_scalar_pair(r + l * s, omega1 * l);
}

/// Admittance of a series RL branch: exact inverse of the 2x2 impedance
/// block. Throws element.singular when the impedance block is singular at s
/// (e.g. R = L = 0, or a pure inductor evaluated at the fundamental).
inline DqBlock rl_series_admittance(double r, double l, double omega1, cplx s) {
    const cplx a = r + l * s;
    const double b = omega1 * l;
    const cplx det = a * a + cplx(b * b);
    if (std::abs(det) == 0.0)
        throw Error("element.singular",
                    "series RL branch has a singular impedance block at s = (" +
                        std::to_string(s.real()) + ", " + std::to_string(s.imag()) + ")");
    Mat2 y;
    y << a, cplx(-b), cplx(b), a;
    y /= det;
    return DqBlock::admittance(y);
}

/// Shunt capacitor admittance [[Cs, C*w1], [-C*w1, Cs]].
inline DqBlock shunt_cap_admittance(double c, double omega1, cplx s) {
    return DqBlock::admittance(dq_scalar_pair(c * s, c * omega1));
}

/// Primitive elements a pi cable expands to before assembly: one series RL
/// plus half the total capacitance at each end.
struct PiExpansion {
    double r = 0.0;
    double l = 0.0;
    double c_half = 0.0; // per end
};

inline PiExpansion pi_cable_expand(double r, double l, double c_total) {
    return {r, l, 0.5 * c_total};
}

} // namespace gridmodes
