#pragma once

// Test-only oracles and generators. Everything here deliberately avoids the
// implementation path it is used to check: the VSC oracle composes the block
// diagram by sequential 2x2 substitution instead of the linear-system
// elimination, the characteristic polynomial comes from Faddeev-LeVerrier
// traces, and the scalar RLC formulas are plain complex arithmetic.

#include "gridmodes/assembly.hpp"
#include "gridmodes/modal.hpp"
#include "gridmodes/netmodel.hpp"
#include "gridmodes/vsc.hpp"

#include <complex>
#include <random>
#include <vector>

namespace gmtest {

using gridmodes::cplx;
using gridmodes::Mat2;
using gridmodes::MatX;
using gridmodes::VecX;

inline const char* data_dir() {
#ifdef GRIDMODES_DATA_DIR
    return GRIDMODES_DATA_DIR;
#else
    return "data";
#endif
}

inline std::string data_path(const std::string& name) {
    return std::string(data_dir()) + "/" + name;
}

// ---------------------------------------------------------------------------
// Table-style converter parameters used across the case studies.
// ---------------------------------------------------------------------------

inline gridmodes::VscParams reference_vsc_params(double q_d = 0.25) {
    gridmodes::VscParams p;
    p.kp_pll = 0.0163;
    p.ki_pll = 0.326;
    p.kp_ol = 4.0825e-6;
    p.ki_ol = 0.00408;
    p.kp_il = 0.358;
    p.ki_il = 11.25;
    p.tau_ffv = 0.010;
    p.tau_sw = 1.0 / 2000.0;
    p.q_d = q_d;
    p.r_c = 0.0112;
    p.l_c = 0.358e-3;
    p.operating_point = gridmodes::OperatingPoint{563.38, 0.0, 0.0, 0.0, 0.0};
    return p;
}

// ---------------------------------------------------------------------------
// Independent VSC admittance oracle: straight-line composition of the block
// diagram with explicit 2x2 algebra.
// ---------------------------------------------------------------------------

inline Mat2 vsc_admittance_oracle(const gridmodes::VscParams& p, double w1, cplx s) {
    using Eigen::Matrix2d;
    using Eigen::Vector2d;
    const gridmodes::ControllerBlocks b = gridmodes::make_controller_blocks(p, w1, s);
    const Matrix2d rot = b.rot_g2l;
    const Matrix2d rot_t = rot.transpose();

    // dtheta = g^T dv, dv_local = Gv dv
    const Eigen::RowVector2d ed(0.0, 1.0);
    const cplx denom = 1.0 - b.f_pll * (ed * rot * b.w_voltage)(0);
    Eigen::Matrix<cplx, 1, 2> g = (-b.f_pll / denom) * (ed * rot).cast<cplx>();
    Mat2 gv = rot.cast<cplx>() - (rot * b.w_voltage).cast<cplx>() * g;

    // outer loop: di_ref = Av dv_local + Ai di_local
    Eigen::Matrix2d pv, pi;
    gridmodes::power_coefficients(p.operating_point, pv, pi);
    Mat2 av, ai;
    av.row(0) = -b.f_olp * pv.row(0).cast<cplx>();
    av.row(1) = -b.f_olq * pv.row(1).cast<cplx>();
    ai.row(0) = -b.f_olp * pi.row(0).cast<cplx>();
    ai.row(1) = -b.f_olq * pi.row(1).cast<cplx>();

    // inner loop: dv_ref = Cv dv_local + Ci di_local
    const Mat2 cv = b.h_v * Mat2::Identity() - b.f_il * av;
    const Mat2 ci = b.k_dec - b.f_il * ai;

    // di_local = rot di_c + w_current dtheta
    // dv_c = rot^T (F_D dv_ref - w_conv dtheta)
    const Mat2 bv = rot_t.cast<cplx>() *
                        (b.f_d * (cv * gv + ci * (b.w_current.cast<cplx>() * g))) -
                    rot_t.cast<cplx>() * (b.w_conv_voltage.cast<cplx>() * g);
    const Mat2 bi = rot_t.cast<cplx>() * (b.f_d * ci) * rot.cast<cplx>() +
                    gridmodes::rl_series_impedance(p.r_c, p.l_c, w1, s);

    return bi.inverse() * (Mat2::Identity() - bv);
}

// ---------------------------------------------------------------------------
// Characteristic polynomial via Faddeev-LeVerrier, roots via a companion
// matrix.
// ---------------------------------------------------------------------------

inline std::vector<cplx> companion_eigenvalues(const MatX& m) {
    const int n = static_cast<int>(m.rows());
    // p(x) = x^n + c[1] x^{n-1} + ... + c[n]
    std::vector<cplx> c(static_cast<size_t>(n) + 1);
    c[0] = 1.0;
    MatX mk = MatX::Zero(n, n);
    for (int k = 1; k <= n; ++k) {
        mk = m * mk + c[static_cast<size_t>(k - 1)] * MatX::Identity(n, n);
        c[static_cast<size_t>(k)] = -(m * mk).trace() / static_cast<double>(k);
    }
    MatX comp = MatX::Zero(n, n);
    for (int i = 1; i < n; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < n; ++i) comp(i, n - 1) = -c[static_cast<size_t>(n - i)];
    Eigen::ComplexEigenSolver<MatX> es(comp, false);
    std::vector<cplx> out;
    for (int i = 0; i < n; ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

// greatest pairwise-match distance between two eigenvalue multisets
inline double multiset_distance(std::vector<cplx> a, std::vector<cplx> b) {
    double worst = 0.0;
    while (!a.empty()) {
        const cplx v = a.back();
        a.pop_back();
        size_t best = 0;
        double bd = std::abs(b[0] - v);
        for (size_t i = 1; i < b.size(); ++i) {
            const double d = std::abs(b[i] - v);
            if (d < bd) { bd = d; best = i; }
        }
        worst = std::max(worst, bd);
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Scalar parallel-RLC impedance: shunt C in parallel with a series RL, both
// to ground. The dq modal impedances of the same single-bus network are this
// scalar evaluated at s +/- j*w1.
// ---------------------------------------------------------------------------

inline cplx parallel_rlc_impedance(double r, double l, double c, cplx s_seq) {
    const cplx y = c * s_seq + 1.0 / (r + l * s_seq);
    return 1.0 / y;
}

// ---------------------------------------------------------------------------
// Synthetic single-mode trace with a known pole pair sigma0 +/- j*w0:
// lambda_z(jw) = G / ((jw - p)(jw - p*)).
// ---------------------------------------------------------------------------

inline gridmodes::ModeTrace constructed_pole_trace(double sigma0, double w0_rad, cplx g,
                                                   double f_span_hz = 200.0,
                                                   double step_hz = 0.25) {
    gridmodes::ModeTrace trace;
    trace.id = 0;
    const double f0 = w0_rad / (2.0 * M_PI);
    const cplx p(sigma0, w0_rad);
    const cplx pc = std::conj(p);
    for (double f = std::max(1.0, f0 - f_span_hz); f <= f0 + f_span_hz; f += step_hz) {
        const cplx jw(0.0, 2.0 * M_PI * f);
        gridmodes::ModeSample smp;
        smp.f_hz = f;
        smp.lambda_z = g / ((jw - p) * (jw - pc));
        smp.lambda_y = 1.0 / smp.lambda_z;
        trace.samples.push_back(smp);
    }
    return trace;
}

// ---------------------------------------------------------------------------
// Random damped passive networks: a random tree of RL branches over n buses,
// shunt capacitors everywhere, one RL grid equivalent in the external
// subsystem, injection on bus 0.
// ---------------------------------------------------------------------------

inline gridmodes::NetworkModel random_passive_network(std::mt19937& rng, int n_buses) {
    using namespace gridmodes;
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    NetworkModel m;
    m.f_base_hz = 50.0;
    for (int i = 0; i < n_buses; ++i) m.buses.push_back("b" + std::to_string(i));
    int k = 0;
    auto add = [&](ElementBody body) {
        m.elements.push_back(Element{"e" + std::to_string(k++), std::move(body)});
    };
    add(GridEquivalent{"b0", 0.05 + 0.3 * ur(rng), (0.05 + 0.4 * ur(rng)) * 1e-3});
    for (int i = 1; i < n_buses; ++i) {
        std::uniform_int_distribution<int> parent(0, i - 1);
        const int p = parent(rng);
        add(RlSeries{"b" + std::to_string(p), "b" + std::to_string(i), 0.02 + 0.2 * ur(rng),
                     (0.1 + 0.5 * ur(rng)) * 1e-3});
    }
    for (int i = 0; i < n_buses; ++i) {
        if (ur(rng) < 0.8)
            add(ShuntCap{"b" + std::to_string(i), (20.0 + 150.0 * ur(rng)) * 1e-6});
    }
    m.injections.push_back("b0");
    return m;
}

} // namespace gmtest
