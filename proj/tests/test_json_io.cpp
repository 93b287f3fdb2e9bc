#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pexmap/coupling.hpp"
#include "pexmap/errors.hpp"
#include "pexmap/json_io.hpp"
#include "pexmap/ulam.hpp"

using namespace pexmap;

TEST_CASE("map specs round-trip") {
    MapModel v = parse_map_spec(
        R"({"family":"vssv","params":{"lambda":0.4},"truncation":60,"iterate":1})");
    CHECK(v.generator().family == Family::vssv);
    CHECK(v.truncation() == 60);
    CHECK(v.apply(0.7) == doctest::Approx(0.5));

    MapModel d2 = parse_map_spec(R"({"family":"doubling","iterate":2})");
    CHECK(d2.branches().size() == 4);

    MapModel ry = parse_map_spec(
        R"({"family":"geometric_tail","params":{"ratio":0.5,"lambda_rule":"constant","lambda_value":2.0},"truncation":30})");
    CHECK(ry.branches().size() == 30);

    MapModel ex = parse_map_spec(
        R"({"family":"explicit","branches":[{"domain":[0.0,0.5],"slope":2.0,"intercept":0.0},{"domain":[0.5,1.0],"slope":2.0,"intercept":-1.0}]})");
    CHECK(ex.apply(0.75) == doctest::Approx(0.5));

    CHECK_THROWS_AS(parse_map_spec(R"({"family":"nonsense"})"), Error);
}

TEST_CASE("family specs") {
    StandardFamily uniform = parse_family_spec(
        R"([{"support":[0.0,1.0],"density":"uniform","weight":1.0}])");
    REQUIRE(uniform.entries().size() == 1);
    CHECK(uniform.entries()[0].pair.density.value_at(0.3) == doctest::Approx(1.0));

    StandardFamily pieces = parse_family_spec(
        R"([{"support":[0.0,1.0],
             "density":[{"left":0.0,"right":0.5,"value":1.2},
                        {"left":0.5,"right":1.0,"value":0.8}],
             "weight":0.7},
            {"support":[0.25,0.5],"density":"uniform","weight":0.3}])");
    REQUIRE(pieces.entries().size() == 2);
    CHECK(pieces.entries()[0].pair.density.value_at(0.25) == doctest::Approx(1.2));
    CHECK(pieces.entries()[0].pair.density.mass() == doctest::Approx(1.0));
    CHECK(pieces.total_weight() == doctest::Approx(1.0));
}

TEST_CASE("observable specs") {
    ObservableSpec x = parse_observable_spec(R"({"kind":"polynomial","coefficients":[0.0,1.0]})");
    CHECK(x.eval(0.3) == doctest::Approx(0.3));
    ObservableSpec p = parse_observable_spec(R"({"kind":"power_singularity","tau":0.3})");
    CHECK(p.eval(0.25) == doctest::Approx(std::pow(0.25, -0.3)));
    ObservableSpec ind = parse_observable_spec(R"({"kind":"indicator","interval":[0.25,0.5]})");
    CHECK(ind.eval(0.3) == 1.0);
    CHECK(ind.eval(0.7) == 0.0);
    CHECK_THROWS_AS(parse_observable_spec(R"({"kind":"sine"})"), Error);
}

TEST_CASE("full-precision formatting") {
    CHECK(format_full(0.1) == "0.10000000000000001");
    CHECK(format_full(1.0) == "1");
    CHECK(format_full(2.0 / 3.0) == "0.66666666666666663");
}

TEST_CASE("power iteration non-convergence carries the residual") {
    MapModel v = MapModel::vssv(0.4, 40);
    auto m = ulam_matrix(v, 256);
    try {
        stationary_density(m, 1e-12, 2);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::non_convergence);
        CHECK(std::string(e.what()).find("residual") != std::string::npos);
    }
}

TEST_CASE("coupling reports a vanished covering ratio") {
    // a family far from the magnet with phases too short to reach it
    MapModel d2 = MapModel::doubling(2);
    CouplingConstants c;
    c.q0 = 0.5;
    c.delta0 = 0.25;
    c.theta0 = std::pow(2.0, -0.5);
    c.c_r = 1.0;
    c.c0 = 9.656854249492383;
    c.c_p = 105900.26576104114;
    c.n_p = 0;
    c.n_c = 1;
    c.magnet = Interval{0.3, 0.9};
    c.rho_bar_c = 0.5 * std::exp(-1.0);
    c.d_c = 0.5;
    c.theta_c = std::exp(-1.0) * 0.6 * 0.5 * c.rho_bar_c;
    c.n_coupling = 2;
    StandardFamily fam = StandardFamily::single(StandardPair::lebesgue(Interval{0.5, 0.53}));
    try {
        run_coupling(d2, fam, c, 2);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::covering_ratio_zero);
    }
}
