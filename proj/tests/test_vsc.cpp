#include <catch_amalgamated.hpp>

#include "gridmodes/vsc.hpp"

#include "helpers.hpp"

#include <random>

using namespace gridmodes;
using Catch::Approx;

namespace {
constexpr double kW1 = 2.0 * M_PI * 50.0;
}

TEST_CASE("pade delay is exactly one at tau = 0", "[vsc]") {
    CHECK(pade_delay(0.0, cplx(0.0, 123.0)) == cplx(1.0, 0.0));
    CHECK(pade_delay(0.0, cplx(4.5, -3.0)) == cplx(1.0, 0.0));
}

TEST_CASE("pade delay is all-pass on the jw axis", "[vsc]") {
    const double tau = 1.25e-4;
    for (double f : {1.0, 100.0, 1000.0, 1192.0, 2500.0, 10000.0}) {
        const cplx v = pade_delay(tau, cplx(0.0, 2.0 * M_PI * f));
        CHECK(std::abs(std::abs(v) - 1.0) < 1e-9);
    }
}

TEST_CASE("pade delay phase tracks -w*tau", "[vsc]") {
    const double tau = 1.25e-4;
    const double w = 2.0 * M_PI * 100.0;
    const cplx v = pade_delay(tau, cplx(0.0, w));
    CHECK(std::arg(v) == Approx(-w * tau).margin(1e-6));
}

TEST_CASE("open-loop converter is its filter", "[vsc]") {
    // all controller blocks zero (PIs, feed-forward, decoupling), delay left
    // arbitrary: the admittance must collapse to the passive filter's
    const VscParams p = gmtest::reference_vsc_params();
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> uf(2.0, 2900.0);
    for (int trial = 0; trial < 20; ++trial) {
        const cplx s(0.0, 2.0 * M_PI * uf(rng));
        ControllerBlocks b = make_controller_blocks(p, kW1, s);
        b.f_olp = b.f_olq = b.f_il = b.f_pll = 0.0;
        b.h_v = 0.0;
        b.k_dec = Mat2::Zero();
        const DqBlock y = vsc_admittance_from_blocks(b, p, kW1, s);
        const DqBlock y_filter = rl_series_admittance(p.r_c, p.l_c, kW1, s);
        CHECK((y.m - y_filter.m).norm() <= 1e-10 * y_filter.m.norm());
    }
}

TEST_CASE("vsc admittance matches the block-diagram oracle", "[vsc]") {
    const VscParams p = gmtest::reference_vsc_params(0.25);
    const cplx s(0.0, 2.0 * M_PI * 1192.0);
    const DqBlock y = vsc_admittance(p, kW1, s);
    REQUIRE(y.finite());
    const Mat2 oracle = gmtest::vsc_admittance_oracle(p, kW1, s);
    CHECK((y.m - oracle).norm() <= 1e-9 * oracle.norm());
}

TEST_CASE("vsc admittance matches the oracle across parameters", "[vsc]") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        VscParams p = gmtest::reference_vsc_params(0.1 + 0.6 * ur(rng));
        p.operating_point.theta0 = (ur(rng) - 0.5) * 0.4;
        p.operating_point.ic0_q = 200.0 * (ur(rng) - 0.5);
        p.operating_point.ic0_d = 100.0 * (ur(rng) - 0.5);
        p.operating_point.v0_d = 30.0 * (ur(rng) - 0.5);
        const cplx s(0.0, 2.0 * M_PI * (5.0 + 2500.0 * ur(rng)));
        const DqBlock y = vsc_admittance(p, kW1, s);
        const Mat2 oracle = gmtest::vsc_admittance_oracle(p, kW1, s);
        CHECK((y.m - oracle).norm() <= 1e-9 * oracle.norm());
    }
}

TEST_CASE("no-load operating point kills the voltage feed of the power terms", "[vsc]") {
    OperatingPoint op{563.38, 0.0, 0.0, 0.0, 0.0};
    Eigen::Matrix2d pv, pi;
    power_coefficients(op, pv, pi);
    CHECK(pv.norm() == 0.0); // dp/dq carry no local-voltage term when i0 = 0
    CHECK(pi(0, 0) == Approx(1.5 * 563.38));
    CHECK(pi(0, 1) == 0.0);
    CHECK(pi(1, 0) == 0.0); // v0_d = 0
    CHECK(pi(1, 1) == Approx(1.5 * 563.38));
}

TEST_CASE("vsc admittance is conjugate symmetric", "[vsc]") {
    const VscParams p = gmtest::reference_vsc_params(0.4);
    for (double f : {7.0, 333.0, 1192.0, 2711.0}) {
        const cplx s(0.0, 2.0 * M_PI * f);
        const Mat2 yp = vsc_admittance(p, kW1, s).m;
        const Mat2 yn = vsc_admittance(p, kW1, -s).m;
        CHECK((yn - yp.conjugate()).norm() <= 1e-12 * yp.norm());
    }
}

TEST_CASE("vsc admittance is continuous along the sweep axis", "[vsc]") {
    const VscParams p = gmtest::reference_vsc_params(0.5);
    const double f0 = 1100.0;
    const Mat2 base = vsc_admittance(p, kW1, cplx(0.0, 2.0 * M_PI * f0)).m;
    double prev_delta = std::numeric_limits<double>::infinity();
    for (double df : {10.0, 1.0, 0.1, 0.01}) {
        const Mat2 y = vsc_admittance(p, kW1, cplx(0.0, 2.0 * M_PI * (f0 + df))).m;
        const double delta = (y - base).norm() / base.norm();
        CHECK(delta < prev_delta);
        prev_delta = delta;
    }
    CHECK(prev_delta < 1e-4);
}

TEST_CASE("pi blocks are rejected at s = 0", "[vsc]") {
    const VscParams p = gmtest::reference_vsc_params();
    CHECK_THROWS_AS(vsc_admittance(p, kW1, cplx(0.0, 0.0)), Error);
}

TEST_CASE("aggregation with empty shunt and zero series impedance is identity", "[vsc]") {
    const VscParams p = gmtest::reference_vsc_params();
    const cplx s(0.0, 2.0 * M_PI * 700.0);
    const DqBlock y = vsc_admittance(p, kW1, s);
    const DqBlock out = aggregate_converter(y, DqBlock::admittance(Mat2::Zero()),
                                            DqBlock::impedance(Mat2::Zero()));
    CHECK((out.m - y.m).norm() <= 1e-12 * y.m.norm());
}

TEST_CASE("aggregation equals Kron elimination of the interior bus", "[vsc]") {
    // two-bus fragment: converter + filter cap on the interior bus, series
    // transformer to the kept bus; eliminating the interior bus from the
    // assembled Y must reproduce the parallel-then-series composition
    const VscParams p = gmtest::reference_vsc_params(0.5);
    const double r_t = 0.00557, l_t = 1.84e-4, c_f = 1.41471e-4;
    for (double f : {311.0, 1192.0, 2402.0}) {
        const cplx s(0.0, 2.0 * M_PI * f);
        const DqBlock y_vsc = vsc_admittance(p, kW1, s);
        const DqBlock y_cap = shunt_cap_admittance(c_f, kW1, s);
        const Mat2 y_t = rl_series_admittance(r_t, l_t, kW1, s).m;

        MatX full = MatX::Zero(4, 4);
        full.block<2, 2>(0, 0) = y_t;
        full.block<2, 2>(2, 2) = y_t + y_vsc.m + y_cap.m;
        full.block<2, 2>(0, 2) = -y_t;
        full.block<2, 2>(2, 0) = -y_t;
        const MatX reduced = kron_reduce(full, {1});

        const DqBlock agg = aggregate_converter(
            y_vsc, y_cap, DqBlock::impedance(rl_series_impedance(r_t, l_t, kW1, s)));
        CHECK((reduced - agg.m).norm() <= 1e-10 * agg.m.norm());
    }
}

TEST_CASE("aggregation reports which inversion failed", "[vsc]") {
    const DqBlock singular = DqBlock::admittance(Mat2::Zero());
    try {
        aggregate_converter(singular, singular, singular.as(DqRole::admittance));
        FAIL("expected element.singular");
    } catch (const Error& e) {
        CHECK(e.code() == "element.singular");
        CHECK(std::string(e.what()).find("series") != std::string::npos);
    }
}
