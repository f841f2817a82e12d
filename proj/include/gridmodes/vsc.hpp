#pragma once

// Small-signal dq admittance of a grid-connected VSC. The controller is the
// cascaded vector-control structure: PI outer power loops producing current
// references, a PI inner current loop with cross-coupling decoupling and a
// feed-forward voltage filter, a PI PLL, a firmware/PWM delay modelled as a
// [5/5] Pade all-pass, and the converter output filter (R_c, L_c).
//
// Rather than deriving one closed-form 2x2 transfer matrix, the evaluator
// writes every controller relation as a row of a 13-unknown complex linear
// system at the given s and eliminates the internal variables numerically.
// Unknown layout (local = converter frame, global = network frame):
//   0-1  local PCC voltage          2-3  global filter current (into the VSC)
//   4-5  local filter current       6    PLL angle deviation
//   7-8  local current reference    9-10 local modulation reference
//   11-12 global converter voltage
// Current sign: positive from the bus into the converter, so the result
// stamps directly as a shunt admittance.

#include "gridmodes/elements.hpp"
#include "gridmodes/netmodel.hpp"
#include "gridmodes/types.hpp"

#include <array>
#include <cmath>
#include <string>

namespace gridmodes {

/// [5/5] Pade approximation of exp(-tau*s). Exactly all-pass on the jw axis
/// (numerator and denominator are complex conjugates there) and exactly 1 at
/// tau = 0.
inline cplx pade_delay(double tau, cplx s) {
    static constexpr std::array<double, 6> coeff = {1.0,        1.0 / 2.0,   1.0 / 9.0,
                                                    1.0 / 72.0, 1.0 / 1008.0, 1.0 / 30240.0};
    auto poly = [&](cplx x) {
        cplx acc = 0.0;
        for (int k = 5; k >= 0; --k) acc = acc * x + coeff[static_cast<size_t>(k)];
        return acc;
    };
    const cplx x = tau * s;
    return poly(-x) / poly(x);
}

/// Per-frequency evaluations of all controller transfer blocks plus the
/// operating-point-linearized frame rotation data.
struct ControllerBlocks {
    cplx f_olp, f_olq; // outer-loop PIs
    cplx f_il;         // inner-loop PI
    cplx f_pll;        // PLL PI
    cplx h_v;          // feed-forward voltage filter 1/(1 + tau_ffv s)
    cplx f_d;          // Pade delay
    Mat2 k_dec;        // inner-loop current feedback [[F_il, -w1 L_c], [w1 L_c, F_il]]

    Eigen::Matrix2d rot_g2l;   // global -> local rotation at theta0
    Eigen::Vector2d w_voltage; // d(rotation)/d(theta) offset for the PCC voltage (local -> global)
    Eigen::Vector2d w_current; // offset for the filter current (global -> local)
    Eigen::Vector2d w_conv_voltage; // offset for the converter voltage (global -> local)
};

namespace detail {

inline cplx pi_block(double kp, double ki, cplx s) { return kp + ki / s; }

// d/dtheta of the global->local rotation applied to the steady global vector.
inline Eigen::Vector2d rotation_offset_g2l(double theta0, const Eigen::Vector2d& x0_global) {
    const double c = std::cos(theta0), sn = std::sin(theta0);
    return {-x0_global.x() * sn - x0_global.y() * c, x0_global.x() * c - x0_global.y() * sn};
}

// d/dtheta of the local->global rotation applied to the steady local vector.
inline Eigen::Vector2d rotation_offset_l2g(double theta0, const Eigen::Vector2d& x0_local) {
    const double c = std::cos(theta0), sn = std::sin(theta0);
    return {-x0_local.x() * sn + x0_local.y() * c, -x0_local.x() * c - x0_local.y() * sn};
}

} // namespace detail

inline ControllerBlocks make_controller_blocks(const VscParams& p, double omega1, cplx s) {
    if (s == cplx(0.0, 0.0))
        throw Error("vsc.invalid_frequency", "PI controller blocks are undefined at s = 0");
    ControllerBlocks b;
    b.f_olp = detail::pi_block(p.kp_ol, p.ki_ol, s);
    b.f_olq = detail::pi_block(p.kp_olq_eff(), p.ki_olq_eff(), s);
    b.f_il = detail::pi_block(p.kp_il, p.ki_il, s);
    b.f_pll = detail::pi_block(p.kp_pll, p.ki_pll, s);
    b.h_v = 1.0 / (1.0 + p.tau_ffv * s);
    b.f_d = pade_delay(p.tau_fd(), s);
    b.k_dec << b.f_il, cplx(-omega1 * p.l_c), cplx(omega1 * p.l_c), b.f_il;

    const double c = std::cos(p.operating_point.theta0);
    const double sn = std::sin(p.operating_point.theta0);
    b.rot_g2l << c, -sn, sn, c;

    const Eigen::Vector2d v0_local(p.operating_point.v0_q, p.operating_point.v0_d);
    const Eigen::Vector2d i0_local(p.operating_point.ic0_q, p.operating_point.ic0_d);
    // steady converter voltage from the filter equation at dq steady state
    Eigen::Matrix2d zf0;
    zf0 << p.r_c, omega1 * p.l_c, -omega1 * p.l_c, p.r_c;
    const Eigen::Vector2d vc0_local = v0_local - zf0 * i0_local;

    const Eigen::Matrix2d rot_l2g = b.rot_g2l.transpose();
    b.w_voltage = detail::rotation_offset_l2g(p.operating_point.theta0, v0_local);
    b.w_current = detail::rotation_offset_g2l(p.operating_point.theta0, rot_l2g * i0_local);
    b.w_conv_voltage = detail::rotation_offset_g2l(p.operating_point.theta0, rot_l2g * vc0_local);
    return b;
}

/// Coefficients of the linearized instantaneous power expressions:
/// [dp; dq] = Pv * dv_local + Pi * di_local (peak-value dq convention).
inline void power_coefficients(const OperatingPoint& op, Eigen::Matrix2d& pv,
                               Eigen::Matrix2d& pi) {
    pv << op.ic0_q, op.ic0_d, op.ic0_d, -op.ic0_q;
    pi << op.v0_q, op.v0_d, -op.v0_d, op.v0_q;
    pv *= 1.5;
    pi *= 1.5;
}

/// Eliminate the controller internals at one s given pre-evaluated blocks.
/// Throws vsc.singular (with an rcond estimate) when the internal system is
/// degenerate at this frequency.
inline DqBlock vsc_admittance_from_blocks(const ControllerBlocks& b, const VscParams& p,
                                          double omega1, cplx s) {
    using Mat = Eigen::Matrix<cplx, 13, 13>;
    Mat a = Mat::Zero();
    Eigen::Matrix<cplx, 13, 2> rhs = Eigen::Matrix<cplx, 13, 2>::Zero();

    const Eigen::Matrix2d rot = b.rot_g2l;
    const Eigen::Matrix2d rot_t = rot.transpose();

    // rows 0-1: PCC voltage frame change (local -> global) = dv
    for (int r = 0; r < 2; ++r) {
        for (int cidx = 0; cidx < 2; ++cidx) a(r, cidx) = rot_t(r, cidx);
        a(r, 6) = b.w_voltage(r);
        rhs(r, r) = 1.0;
    }
    // rows 2-3: filter equation dv = dv_c + Z_f * di_c
    const Mat2 zf = rl_series_impedance(p.r_c, p.l_c, omega1, s);
    for (int r = 0; r < 2; ++r) {
        a(2 + r, 11 + r) = 1.0;
        for (int cidx = 0; cidx < 2; ++cidx) a(2 + r, 2 + cidx) = zf(r, cidx);
        rhs(2 + r, r) = 1.0;
    }
    // rows 4-5: current frame change (global -> local)
    for (int r = 0; r < 2; ++r) {
        a(4 + r, 4 + r) = 1.0;
        for (int cidx = 0; cidx < 2; ++cidx) a(4 + r, 2 + cidx) = -rot(r, cidx);
        a(4 + r, 6) = -b.w_current(r);
    }
    // row 6: PLL, dtheta = -F_pll * dv_local_d
    a(6, 6) = 1.0;
    a(6, 1) = b.f_pll;
    // rows 7-8: outer loops, di_ref = -diag(F_olp, F_olq) * [dp; dq]
    Eigen::Matrix2d pv, pi;
    power_coefficients(p.operating_point, pv, pi);
    const cplx fol[2] = {b.f_olp, b.f_olq};
    for (int r = 0; r < 2; ++r) {
        a(7 + r, 7 + r) = 1.0;
        for (int cidx = 0; cidx < 2; ++cidx) {
            a(7 + r, cidx) += fol[r] * pv(r, cidx);
            a(7 + r, 4 + cidx) += fol[r] * pi(r, cidx);
        }
    }
    // rows 9-10: inner loop, dv_ref = H_v dv_local - F_il di_ref + K di_local
    for (int r = 0; r < 2; ++r) {
        a(9 + r, 9 + r) = 1.0;
        a(9 + r, r) = -b.h_v;
        a(9 + r, 7 + r) = b.f_il;
        for (int cidx = 0; cidx < 2; ++cidx) a(9 + r, 4 + cidx) = -b.k_dec(r, cidx);
    }
    // rows 11-12: converter voltage frame change, F_D dv_ref = rot * dv_c + w * dtheta
    for (int r = 0; r < 2; ++r) {
        a(11 + r, 9 + r) = b.f_d;
        for (int cidx = 0; cidx < 2; ++cidx) a(11 + r, 11 + cidx) = -rot(r, cidx);
        a(11 + r, 6) = -b.w_conv_voltage(r);
    }

    Eigen::PartialPivLU<Mat> lu(a);
    const double rc = lu.rcond();
    if (!(rc > 1e-14))
        throw Error("vsc.singular",
                    "VSC internal system is singular at s = (" + std::to_string(s.real()) + ", " +
                        std::to_string(s.imag()) + ") rad/s, rcond estimate " +
                        std::to_string(rc));
    const Eigen::Matrix<cplx, 13, 2> x = lu.solve(rhs);
    Mat2 y;
    y << x(2, 0), x(2, 1), x(3, 0), x(3, 1);
    return DqBlock::admittance(y);
}

/// Full per-frequency VSC admittance: evaluate blocks, then eliminate.
inline DqBlock vsc_admittance(const VscParams& p, double omega1, cplx s) {
    return vsc_admittance_from_blocks(make_controller_blocks(p, omega1, s), p, omega1, s);
}

/// Merge a converter with its shunt filter and series branch into one block:
/// parallel admittances first, then the series impedance, i.e.
/// [(Z_vsc || Z_shunt) + Z_series]^{-1}. The shunt argument is normalized to
/// an admittance (a zero admittance means "no shunt") and the series argument
/// to an impedance (a zero impedance means "no series branch").
inline DqBlock aggregate_converter(const DqBlock& y_vsc, const DqBlock& shunt,
                                   const DqBlock& series) {
    Mat2 y_par = y_vsc.as(DqRole::admittance).m;
    try {
        y_par += shunt.as(DqRole::admittance).m;
    } catch (const Error& e) {
        throw Error(e.code(), std::string("aggregation: shunt block not invertible: ") + e.what());
    }
    Mat2 z_series;
    try {
        z_series = series.as(DqRole::impedance).m;
    } catch (const Error& e) {
        throw Error(e.code(), std::string("aggregation: series block not invertible: ") + e.what());
    }
    DqBlock z_par;
    try {
        z_par = DqBlock::admittance(y_par).inverse();
    } catch (const Error& e) {
        throw Error(e.code(),
                    std::string("aggregation: parallel combination not invertible: ") + e.what());
    }
    try {
        return DqBlock::impedance(z_par.m + z_series).inverse();
    } catch (const Error& e) {
        throw Error(e.code(),
                    std::string("aggregation: series combination not invertible: ") + e.what());
    }
}

/// Admittance of an already-merged converter element at one frequency.
inline DqBlock aggregated_vsc_admittance(const AggregatedVsc& e, double omega1, cplx s) {
    const DqBlock y_vsc = vsc_admittance(e.params, omega1, s);
    const DqBlock y_shunt = shunt_cap_admittance(e.shunt_c, omega1, s);
    const DqBlock z_series =
        DqBlock::impedance(rl_series_impedance(e.series_r, e.series_l, omega1, s));
    return aggregate_converter(y_vsc, y_shunt, z_series);
}

} // namespace gridmodes
