#include <catch_amalgamated.hpp>

#include "gridmodes/assembly.hpp"
#include "gridmodes/run.hpp"

#include "helpers.hpp"

#include <random>

using namespace gridmodes;

namespace {
constexpr double kW1 = 2.0 * M_PI * 50.0;

NetworkModel load(const char* name) {
    return parse_network(read_file(gmtest::data_path(name)));
}
} // namespace

TEST_CASE("single shunt capacitor bus assembles to its own block", "[assembly]") {
    NetworkModel m;
    m.f_base_hz = 50.0;
    m.buses = {"b1"};
    m.elements = {Element{"c", ShuntCap{"b1", 100e-6}}};
    m.injections = {"b1"};
    const cplx s(0.0, 2.0 * M_PI * 700.0);
    const SystemMatrices sm = assemble(m, s);
    CHECK((sm.y_t - shunt_cap_admittance(100e-6, kW1, s).m).norm() == 0.0);
    CHECK(sm.y_s.norm() == 0.0);
}

TEST_CASE("two-converter case assembles to the expected block pattern", "[assembly]") {
    const NetworkModel m = load("case1_go1.json");
    const cplx s(0.0, 2.0 * M_PI * 1192.0);
    const SystemMatrices sm = assemble(m, s);

    const Mat2 y_tl = rl_series_admittance(0.00557, 1.84e-4, kW1, s).m;
    const Mat2 y_cc = shunt_cap_admittance(1.41471e-4, kW1, s).m;
    const Mat2 y_g = rl_series_admittance(0.002, 5.0e-5, kW1, s).m;
    const auto& vsc1 = std::get<Vsc>(m.find_element("vsc1")->body);
    const Mat2 y_vsc = vsc_admittance(vsc1.params, kW1, s).m;

    // Y_N: bus 1 carries both transformer stamps, buses 2/3 transformer+cap
    CHECK((sm.y_n.block<2, 2>(0, 0) - (y_tl + y_tl)).norm() < 1e-13 * y_tl.norm());
    CHECK((sm.y_n.block<2, 2>(0, 2) + y_tl).norm() < 1e-13 * y_tl.norm());
    CHECK((sm.y_n.block<2, 2>(0, 4) + y_tl).norm() < 1e-13 * y_tl.norm());
    CHECK((sm.y_n.block<2, 2>(2, 2) - (y_tl + y_cc)).norm() < 1e-13 * y_tl.norm());
    CHECK(sm.y_n.block<2, 2>(2, 4).norm() == 0.0);

    // Y_S: block diagonal grid equivalent + converters
    CHECK((sm.y_s.block<2, 2>(0, 0) - y_g).norm() < 1e-13 * y_g.norm());
    CHECK((sm.y_s.block<2, 2>(2, 2) - y_vsc).norm() < 1e-12 * y_vsc.norm());
    CHECK(sm.y_s.block<2, 2>(0, 2).norm() == 0.0);
    CHECK(sm.y_s.block<2, 2>(2, 0).norm() == 0.0);

    // identity Y_T = Y_N + Y_S holds entrywise by construction
    CHECK((sm.y_t - (sm.y_n + sm.y_s)).norm() == 0.0);
}

TEST_CASE("string network assembles with summed cable halves", "[assembly]") {
    const NetworkModel m = load("case2a.json");
    const cplx s(0.0, 2.0 * M_PI * 777.0);
    const SystemMatrices sm = assemble(m, s);

    const Mat2 y_rl = rl_series_admittance(2 * 9.773e-4, 2 * 1.82e-6, kW1, s).m;
    const Mat2 y_ccl = shunt_cap_admittance(82.28e-6, kW1, s).m;
    const Mat2 y_tl = rl_series_admittance(0.00557, 1.84e-4, kW1, s).m;

    // bus 2 diagonal: tl1 + (rl1 + rl2) + (ccl1 + ccl2)
    const Mat2 expected22 = y_tl + 2.0 * y_rl + 2.0 * y_ccl;
    CHECK((sm.y_n.block<2, 2>(2, 2) - expected22).norm() < 1e-12 * expected22.norm());
    // bus 6 diagonal: tl3 + rl3 + ccl3 (single cable end)
    const Mat2 expected66 = y_tl + y_rl + y_ccl;
    CHECK((sm.y_n.block<2, 2>(10, 10) - expected66).norm() < 1e-12 * expected66.norm());
    // string topology: no direct coupling bus1 <-> bus4
    CHECK(sm.y_n.block<2, 2>(0, 6).norm() == 0.0);
}

TEST_CASE("off-diagonal stamps are symmetric for two-terminal elements", "[assembly]") {
    std::mt19937 rng(5);
    const NetworkModel m = gmtest::random_passive_network(rng, 6);
    const SystemMatrices sm = assemble(m, cplx(0.0, 2.0 * M_PI * 431.0));
    const int n = sm.n_buses();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            CHECK((sm.y_n.block<2, 2>(2 * i, 2 * j) - sm.y_n.block<2, 2>(2 * j, 2 * i)).norm() <
                  1e-13);
}

TEST_CASE("floating series branch yields a detectably singular Y_T", "[assembly]") {
    NetworkModel m;
    m.f_base_hz = 50.0;
    m.buses = {"b1", "b2"};
    m.elements = {Element{"rl", RlSeries{"b1", "b2", 0.1, 1e-3}}};
    m.injections = {"b1"};
    const SystemMatrices sm = assemble(m, cplx(0.0, 2.0 * M_PI * 120.0));
    const ModalDecomposition d = decompose_admittance(sm.y_t);
    CHECK(d.near_singular);
}

TEST_CASE("grouped model equals the Kron reduction of the ungrouped one", "[assembly]") {
    const NetworkModel m = load("case1_go1.json");
    const auto go2 = parse_grouping(read_file(gmtest::data_path("case1_go2.json")));
    const auto go3 = parse_grouping(read_file(gmtest::data_path("case1_go3.json")));

    for (const auto& directives : {go2, go3}) {
        const NetworkModel grouped = apply_grouping(m, directives);
        REQUIRE(grouped.buses.size() == 2);
        std::mt19937 rng(41);
        std::uniform_real_distribution<double> uf(2.0, 2995.0);
        for (int trial = 0; trial < 12; ++trial) {
            const cplx s(0.0, 2.0 * M_PI * uf(rng));
            const MatX y_full = assemble(m, s).y_t;
            const MatX y_grouped = assemble(grouped, s).y_t;
            // eliminated bus: the one the grouped model no longer contains
            int gone = -1;
            for (int b = 0; b < 3; ++b)
                if (grouped.bus_index(m.buses[static_cast<size_t>(b)]) < 0) gone = b;
            REQUIRE(gone >= 0);
            const MatX reduced = kron_reduce(y_full, {gone});
            CHECK((reduced - y_grouped).norm() <= 1e-8 * y_grouped.norm());
        }
    }
}

TEST_CASE("empty directive list leaves the model unchanged", "[assembly]") {
    const NetworkModel m = load("case1_go1.json");
    const NetworkModel same = apply_grouping(m, {});
    CHECK(serialize_network(same) == serialize_network(m));
}

TEST_CASE("grouping directives demand the converter-filter-series pattern", "[assembly]") {
    const NetworkModel m = load("case1_go1.json");
    auto expect_pattern_error = [&](GroupingDirective d, const char* needle) {
        try {
            apply_grouping(m, {d});
            FAIL("expected grouping.pattern");
        } catch (const Error& e) {
            CHECK(e.code() == "grouping.pattern");
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    expect_pattern_error({"nope", "cc2", "tl2"}, "no element named");
    expect_pattern_error({"vsc2", "cc1", "tl2"}, "not on the converter bus");
    expect_pattern_error({"vsc2", "cc2", "tl1"}, "does not touch the converter bus");
    expect_pattern_error({"cc2", "cc2", "tl2"}, "not a vsc element");
}

TEST_CASE("grouping drops the 14-bus system order from 30 to 28", "[assembly]") {
    const NetworkModel m = load("case2b.json");
    REQUIRE(2 * m.buses.size() == 30);
    const auto directives = parse_grouping(read_file(gmtest::data_path("case2b_go2.json")));
    const NetworkModel grouped = apply_grouping(m, directives);
    CHECK(2 * grouped.buses.size() == 28);
    const cplx s(0.0, 2.0 * M_PI * 888.0);
    CHECK(assemble(grouped, s).y_t.rows() == 28);
}

TEST_CASE("z_n is the inverse of y_n with a condition estimate", "[assembly]") {
    const NetworkModel m = load("case1_go1.json");
    const SystemMatrices sm = assemble(m, cplx(0.0, 2.0 * M_PI * 222.0));
    const MatX& zn = sm.z_n();
    CHECK((sm.y_n * zn - MatX::Identity(6, 6)).norm() < 1e-10);
    CHECK(sm.zn_rcond > 0.0);
}
