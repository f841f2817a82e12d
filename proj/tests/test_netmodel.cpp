#include <catch_amalgamated.hpp>

#include "gridmodes/netmodel.hpp"
#include "gridmodes/run.hpp"

#include "helpers.hpp"

using namespace gridmodes;

TEST_CASE("minimal one-bus document parses", "[netmodel]") {
    const NetworkModel m = parse_network(read_file(gmtest::data_path("minimal.json")));
    CHECK(m.f_base_hz == 50.0);
    REQUIRE(m.buses.size() == 1);
    REQUIRE(m.elements.size() == 1);
    CHECK(m.elements[0].kind() == std::string("grid_equivalent"));
    CHECK(m.injections == std::vector<BusId>{"b1"});
    CHECK(validate(m).empty());
}

TEST_CASE("two-converter case document parses to 3 buses and 7 elements", "[netmodel]") {
    const NetworkModel m = parse_network(read_file(gmtest::data_path("case1_go1.json")));
    CHECK(m.buses.size() == 3);
    CHECK(m.elements.size() == 7);
    int vscs = 0, caps = 0, tfs = 0, grids = 0;
    for (const auto& e : m.elements) {
        if (std::holds_alternative<Vsc>(e.body)) ++vscs;
        if (std::holds_alternative<ShuntCap>(e.body)) ++caps;
        if (std::holds_alternative<Transformer>(e.body)) ++tfs;
        if (std::holds_alternative<GridEquivalent>(e.body)) ++grids;
    }
    CHECK(vscs == 2);
    CHECK(caps == 2);
    CHECK(tfs == 2);
    CHECK(grids == 1);
    CHECK(validate(m).empty());
    // no-load default operating point from v_nom_peak
    const Vsc& vsc = std::get<Vsc>(m.find_element("vsc1")->body);
    CHECK(vsc.params.operating_point.v0_q == 563.38);
    CHECK(vsc.params.operating_point.ic0_q == 0.0);
    CHECK(vsc.params.operating_point.theta0 == 0.0);
    CHECK(vsc.params.tau_fd() == Catch::Approx(1.25e-4));
}

TEST_CASE("references to undeclared buses are rejected", "[netmodel]") {
    const std::string doc = R"({
      "f_base_hz": 50.0,
      "buses": ["b1"],
      "elements": [{"kind": "shunt_cap", "bus": "b9", "c": 1e-6}],
      "injections": ["b1"]
    })";
    try {
        parse_network(doc);
        FAIL("expected parse.unknown_bus");
    } catch (const Error& e) {
        CHECK(e.code() == "parse.unknown_bus");
        CHECK(std::string(e.what()).find("b9") != std::string::npos);
    }
}

TEST_CASE("unknown element kinds and keys are rejected", "[netmodel]") {
    const std::string unknown_kind = R"({
      "f_base_hz": 50.0, "buses": ["b1"],
      "elements": [{"kind": "mystery", "bus": "b1"}], "injections": ["b1"]
    })";
    CHECK_THROWS_WITH(parse_network(unknown_kind),
                      Catch::Matchers::ContainsSubstring("unknown element kind"));

    const std::string unknown_key = R"({
      "f_base_hz": 50.0, "buses": ["b1"],
      "elements": [{"kind": "shunt_cap", "bus": "b1", "c": 1e-6, "color": "red"}],
      "injections": ["b1"]
    })";
    try {
        parse_network(unknown_key);
        FAIL("expected parse.unknown_key");
    } catch (const Error& e) {
        CHECK(e.code() == "parse.unknown_key");
    }
}

TEST_CASE("negative passive values are unit violations at parse time", "[netmodel]") {
    const std::string doc = R"({
      "f_base_hz": 50.0, "buses": ["b1"],
      "elements": [{"kind": "shunt_cap", "bus": "b1", "c": -1e-6}],
      "injections": ["b1"]
    })";
    try {
        parse_network(doc);
        FAIL("expected parse.unit");
    } catch (const Error& e) {
        CHECK(e.code() == "parse.unit");
    }
}

TEST_CASE("syntax errors carry a position", "[netmodel]") {
    try {
        parse_network("{\"f_base_hz\": 50.0, }");
        FAIL("expected parse.syntax");
    } catch (const Error& e) {
        CHECK(e.code() == "parse.syntax");
        // nlohmann reports byte positions; the message must carry one
        CHECK(std::string(e.what()).find("parse error") != std::string::npos);
    }
}

TEST_CASE("parse / serialize round trip is stable", "[netmodel]") {
    for (const char* name : {"minimal.json", "case1_go1.json", "case2a.json"}) {
        const NetworkModel m1 = parse_network(read_file(gmtest::data_path(name)));
        const std::string dumped = serialize_network(m1);
        const NetworkModel m2 = parse_network(dumped);
        CHECK(serialize_network(m2) == dumped);
        CHECK(model_fingerprint(m1) == model_fingerprint(m2));
    }
}

TEST_CASE("validate flags structural violations as data", "[netmodel]") {
    NetworkModel m = parse_network(read_file(gmtest::data_path("case1_go1.json")));
    CHECK(validate(m).empty());

    NetworkModel bad = m;
    std::get<ShuntCap>(bad.elements[3].body).c = -1e-6;
    auto violations = validate(bad);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].element == "cc1");
    CHECK(violations[0].field == "c");

    NetworkModel no_inj = m;
    no_inj.injections.clear();
    violations = validate(no_inj);
    REQUIRE(violations.size() == 1);
    CHECK(violations[0].field == "injections");
}

TEST_CASE("validate(parse(x)) is empty for accepted documents", "[netmodel]") {
    for (const char* name :
         {"minimal.json", "case1_go1.json", "case2a.json", "case2b.json"}) {
        const NetworkModel m = parse_network(read_file(gmtest::data_path(name)));
        CHECK(validate(m).empty());
    }
}

TEST_CASE("measured tables parse and demand consistent lengths", "[netmodel]") {
    const std::string doc = R"({
      "f_base_hz": 50.0, "buses": ["b1"],
      "elements": [
        {"kind": "grid_equivalent", "bus": "b1", "r": 0.01, "l": 1e-4},
        {"kind": "measured_table", "name": "mt", "bus": "b1",
         "frequencies_hz": [10.0, 2000.0],
         "y_qq": [[0.5, 0.0], [0.5, 1.0]],
         "y_qd": [[0.0, 0.0], [0.0, 0.0]],
         "y_dq": [[0.0, 0.0], [0.0, 0.0]],
         "y_dd": [[0.5, 0.0], [0.5, 1.0]]}
      ],
      "injections": ["b1"]
    })";
    const NetworkModel m = parse_network(doc);
    const auto& mt = std::get<MeasuredTable>(m.find_element("mt")->body);
    REQUIRE(mt.frequencies_hz.size() == 2);
    CHECK(mt.blocks[1](0, 0) == cplx(0.5, 1.0));

    const std::string bad = R"({
      "f_base_hz": 50.0, "buses": ["b1"],
      "elements": [
        {"kind": "measured_table", "bus": "b1",
         "frequencies_hz": [10.0, 5.0],
         "y_qq": [[0.5, 0.0], [0.5, 1.0]],
         "y_qd": [[0.0, 0.0], [0.0, 0.0]],
         "y_dq": [[0.0, 0.0], [0.0, 0.0]],
         "y_dd": [[0.5, 0.0], [0.5, 1.0]]}
      ],
      "injections": ["b1"]
    })";
    CHECK_THROWS_WITH(parse_network(bad),
                      Catch::Matchers::ContainsSubstring("strictly increasing"));
}
