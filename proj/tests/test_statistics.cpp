#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "pexmap/errors.hpp"
#include "pexmap/statistics.hpp"

using namespace pexmap;

TEST_CASE("expectation against piecewise-constant densities") {
    PiecewiseDensity u = PiecewiseDensity::uniform();
    CHECK(expectation(u, ObservableSpec::polynomial({0.0, 1.0})) == doctest::Approx(0.5));
    CHECK(expectation(u, ObservableSpec::power_singularity(0.3)) ==
          doctest::Approx(1.0 / 0.7).epsilon(1e-14));
    CHECK(expectation(u, ObservableSpec::indicator_of(Interval{0.25, 0.5})) ==
          doctest::Approx(0.25));
}

TEST_CASE("exact correlations on the doubling map") {
    MapModel dbl = MapModel::doubling();
    ObservableSpec x = ObservableSpec::polynomial({0.0, 1.0});
    auto s = correlation_series(dbl, x, x, 20, CorrelationMethod::exact);
    CHECK(s.cov[0] == doctest::Approx(1.0 / 12.0).epsilon(1e-14));
    CHECK(s.cov[3] == doctest::Approx(std::pow(2.0, -3) / 12.0).epsilon(1e-13));
    for (int n = 0; n <= 20; ++n)
        CHECK(std::abs(s.cov[n] - std::pow(2.0, -n) / 12.0) <= 1e-12);
    CHECK(s.fitted_rate == doctest::Approx(0.5).epsilon(1e-6));

    ObservableSpec c = ObservableSpec::polynomial({3.7});
    auto sc = correlation_series(dbl, c, c, 8, CorrelationMethod::exact);
    for (double v : sc.cov) CHECK(std::abs(v) <= 1e-13);
}

TEST_CASE("exact correlations on vssv against stationarity") {
    MapModel v = MapModel::vssv(0.4, 60);
    ObservableSpec x = ObservableSpec::polynomial({0.0, 1.0});
    auto s = correlation_series(v, x, x, 25, CorrelationMethod::exact);
    CHECK(s.cov[0] > 0.0);
    CHECK(s.fitted_rate < 1.0);
    // Cov at n = 0 equals Var(f) >= 0 under the invariant density
    PiecewiseDensity h = invariant_density(v);
    double ef = expectation(h, x);
    double ef2 = expectation(h, ObservableSpec::polynomial({0.0, 0.0, 1.0}));
    CHECK(s.cov[0] == doctest::Approx(ef2 - ef * ef).epsilon(1e-12));
}

TEST_CASE("green-kubo variance") {
    MapModel dbl = MapModel::doubling();
    ObservableSpec x = ObservableSpec::polynomial({0.0, 1.0});
    auto s = correlation_series(dbl, x, x, 60, CorrelationMethod::exact);
    auto gk = green_kubo_sigma(s, 60);
    CHECK(gk.sigma2 == doctest::Approx(0.25).epsilon(1e-12));
    CHECK_FALSE(gk.coboundary);

    ObservableSpec c = ObservableSpec::polynomial({1.0});
    auto sc = correlation_series(dbl, c, c, 30, CorrelationMethod::exact);
    CHECK(green_kubo_sigma(sc, 30).sigma2 <= 1e-12);

    // coboundary f = x - T(x): sigma^2 collapses
    ObservableSpec cob;
    cob.kind = ObservableSpec::Kind::piecewise;
    cob.pieces.emplace_back(Interval{0.0, 0.5}, std::vector<double>{0.0, -1.0});
    cob.pieces.emplace_back(Interval{0.5, 1.0}, std::vector<double>{1.0, -1.0});
    auto scob = correlation_series(dbl, cob, cob, 60, CorrelationMethod::exact);
    auto gkc = green_kubo_sigma(scob, 60);
    CHECK(gkc.sigma2 <= 1e-6);
}

TEST_CASE("monte-carlo correlations agree with the exact series") {
    MapModel dbl = MapModel::doubling();
    ObservableSpec x = ObservableSpec::polynomial({0.0, 1.0});
    auto exact = correlation_series(dbl, x, x, 20, CorrelationMethod::exact);
    McOptions mc;
    mc.seed = 424242;
    mc.samples = 1000000;
    auto est = correlation_series(dbl, x, x, 20, CorrelationMethod::monte_carlo, mc);
    REQUIRE(est.stderrs.size() == est.cov.size());
    for (int n = 0; n <= 20; ++n) {
        double se = std::max(est.stderrs[n], 1e-12);
        CHECK(std::abs(est.cov[n] - exact.cov[n]) <= 3.0 * se);
    }
}

TEST_CASE("unbounded observable correlations and quadrature oracle") {
    MapModel dbl = MapModel::doubling();
    ObservableSpec f = ObservableSpec::power_singularity(0.3);
    auto s = correlation_series(dbl, f, f, 15, CorrelationMethod::exact);
    CHECK(s.cov[0] == doctest::Approx(1.0 / 0.4 - std::pow(1.0 / 0.7, 2)).epsilon(1e-12));
    // independent Riemann quadrature at small n
    for (int n : {1, 2, 3}) {
        double oracle = oracles::doubling_cov_quadrature(0.3, n, 2000000);
        CHECK(std::abs(s.cov[n] - oracle) <= 2e-4);
    }
    // fitted decay within 0.05 of 2^{tau-1}
    std::vector<double> abscov;
    for (double cvalue : s.cov) abscov.push_back(std::abs(cvalue));
    double rate = 0.0;
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (int n = 2; n <= 15; ++n) {
            sx += n;
            sy += std::log(abscov[n]);
            sxx += static_cast<double>(n) * n;
            sxy += n * std::log(abscov[n]);
            ++m;
        }
        rate = std::exp((m * sxy - sx * sy) / (m * sxx - sx * sx));
    }
    CHECK(std::abs(rate - std::pow(2.0, -0.7)) <= 0.05);
}

TEST_CASE("shift invariance of correlations") {
    MapModel dbl = MapModel::doubling();
    ObservableSpec x = ObservableSpec::polynomial({0.0, 1.0});
    // f o T and g o T as piecewise polynomials
    ObservableSpec xt;
    xt.kind = ObservableSpec::Kind::piecewise;
    xt.pieces.emplace_back(Interval{0.0, 0.5}, std::vector<double>{0.0, 2.0});
    xt.pieces.emplace_back(Interval{0.5, 1.0}, std::vector<double>{-1.0, 2.0});
    auto base = correlation_series(dbl, x, x, 10, CorrelationMethod::exact);
    auto shifted = correlation_series(dbl, xt, xt, 10, CorrelationMethod::exact);
    for (int n = 0; n <= 10; ++n) CHECK(std::abs(base.cov[n] - shifted.cov[n]) <= 1e-8);
}

TEST_CASE("clt preconditions") {
    MapModel dbl = MapModel::doubling();
    ObservableSpec x = ObservableSpec::polynomial({0.0, 1.0});
    CHECK_THROWS_AS(birkhoff_clt_report(dbl, x, 100, 100, 7, 0.0), Error);
    CltReport small = birkhoff_clt_report(dbl, x, 200, 500, 7, 0.25);
    CHECK(small.low_sample_warning);
}

TEST_CASE("variance scaling cross-validates green-kubo for the singular observable") {
    MapModel dbl = MapModel::doubling();
    ObservableSpec f = ObservableSpec::power_singularity(0.3);
    auto series = correlation_series(dbl, f, f, 15, CorrelationMethod::exact);
    auto gk = green_kubo_sigma(series, 15);
    REQUIRE(gk.sigma2 > 0.0);
    // truncation error is negligible against the 10% comparison below
    CHECK(gk.tail_bound <= 2e-3);
    CltReport rep = birkhoff_clt_report(dbl, f, 4000, 4000, 31337, gk.sigma2);
    CHECK(std::abs(rep.variance_slope - gk.sigma2) <= 0.1 * gk.sigma2);
}

TEST_CASE("clt diagnostic is reproducible for a fixed seed") {
    MapModel dbl = MapModel::doubling();
    ObservableSpec x = ObservableSpec::polynomial({0.0, 1.0});
    CltReport a = birkhoff_clt_report(dbl, x, 2000, 2000, 99, 0.25);
    CltReport b = birkhoff_clt_report(dbl, x, 2000, 2000, 99, 0.25);
    CHECK(a.ks_distance == b.ks_distance);
    CHECK(a.variance_slope == b.variance_slope);
}

TEST_CASE("tail norm series") {
    auto s = tail_norm_series(0.3, 0.4, 30);
    CHECK(s.fitted_rate == doctest::Approx(std::pow(2.0, -0.1)).epsilon(1e-12));
    // the n = 1 value is the whole sum over k >= 1 (summation oracle)
    double direct = 0.0;
    for (int k = 1; k <= 4000; ++k) direct += oracles::dyadic_piece_norm(0.3, 0.4, k);
    CHECK(s.values[0] == doctest::Approx(direct).epsilon(1e-10));

    CHECK_THROWS_AS(tail_norm_series(0.3, 0.3, 10), Error);
    CHECK_THROWS_AS(tail_norm_series(0.3, 0.25, 10), Error);
}

TEST_CASE("non-integrable observables are rejected") {
    CHECK_THROWS_AS(ObservableSpec::power_singularity(1.2), Error);
    // f^2 is non-integrable: tau_f + tau_g >= 1
    ObservableSpec f = ObservableSpec::power_singularity(0.6);
    MapModel dbl = MapModel::doubling();
    CHECK_THROWS_AS(correlation_series(dbl, f, f, 3, CorrelationMethod::exact), Error);
}
