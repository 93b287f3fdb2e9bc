#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pexmap/errors.hpp"
#include "pexmap/map_model.hpp"
#include "pexmap/rational.hpp"
#include "pexmap/rng.hpp"

using namespace pexmap;

TEST_CASE("branch_at picks the half-open branch") {
    MapModel dbl = MapModel::doubling();
    const auto& b = dbl.branch_at(0.3);
    CHECK(b.index == 1);
    CHECK(b.domain.lo == doctest::Approx(0.0));
    CHECK(b.domain.hi == doctest::Approx(0.5));

    MapModel v = MapModel::vssv(0.4, 60);
    const auto& b1 = v.branch_at(0.5);
    CHECK(b1.index == 1);
    CHECK(b1.domain.lo == doctest::Approx(0.4));
    CHECK(b1.domain.hi == doctest::Approx(1.0));
    CHECK(b1.affine_action().slope == doctest::Approx(5.0 / 3.0));

    // x = 0.4 is the right endpoint of branch 2's domain (0.16, 0.4]
    const auto& b2 = v.branch_at(0.4);
    CHECK(b2.index == 2);
    CHECK(b2.domain.lo == doctest::Approx(0.16));
    CHECK(b2.domain.hi == doctest::Approx(0.4));
}

TEST_CASE("branch_at error cases") {
    MapModel v = MapModel::vssv(0.4, 10);
    CHECK_THROWS_AS(v.branch_at(0.0), Error);
    CHECK_THROWS_AS(v.branch_at(std::pow(0.4, 11)), Error);  // below truncation
    try {
        v.branch_at(0.0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::zero_point);
    }
    try {
        v.branch_at(std::pow(0.4, 12));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::point_in_tail);
    }
}

TEST_CASE("apply and derivative") {
    MapModel dbl = MapModel::doubling();
    CHECK(dbl.apply(0.3) == doctest::Approx(0.6));
    CHECK(dbl.derivative(0.3) == doctest::Approx(2.0));

    MapModel v = MapModel::vssv(0.4, 60);
    CHECK(v.apply(0.7) == doctest::Approx(0.5));
    CHECK(v.apply(0.2) == doctest::Approx((0.2 - 0.16) / 0.24));
    CHECK(v.derivative(0.2) == doctest::Approx(1.0 / 0.24));
}

TEST_CASE("map validation") {
    // single slope-1 branch (identity-like) is rejected
    std::vector<BranchSpec> degenerate;
    BranchSpec b;
    b.index = 1;
    b.domain = Interval{0.0, 1.0};
    b.action = AffineAction{1.0, 0.0};
    b.image = Interval{0.0, 1.0};
    degenerate.push_back(b);
    CHECK_THROWS_AS(MapModel::explicit_map(degenerate), Error);

    // the Lambda_k = k family from the tower examples has Lambda_1 = 1 but
    // expands elsewhere; it must construct
    LambdaRule idx;
    idx.kind = LambdaRule::Kind::index;
    MapModel gt = MapModel::geometric_tail(0.5, idx, 20);
    CHECK(gt.branches().size() == 20);
    // branch k has slope k and image (0, k 2^{-k}]
    for (const auto& b : gt.branches()) {
        CHECK(b.affine_action().slope == doctest::Approx(static_cast<double>(b.index)));
        CHECK(b.image.hi == doctest::Approx(b.index * std::pow(2.0, -b.index)));
    }

    // contracting branches are rejected outright
    std::vector<BranchSpec> shrink;
    b.action = AffineAction{0.5, 0.0};
    b.image = Interval{0.0, 0.5};
    shrink.push_back(b);
    CHECK_THROWS_AS(MapModel::explicit_map(shrink), Error);
}

TEST_CASE("cells of the refined partition") {
    MapModel dbl = MapModel::doubling();
    auto quarters = dbl.cells(2, Interval{0.0, 1.0});
    REQUIRE(quarters.size() == 4);
    std::vector<std::vector<int>> expected{{1, 1}, {1, 2}, {2, 1}, {2, 2}};
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(quarters[i].word == expected[i]);
        CHECK(quarters[i].interval.lo == doctest::Approx(0.25 * i));
        CHECK(quarters[i].interval.hi == doctest::Approx(0.25 * (i + 1)));
    }

    auto two = dbl.cells(1, Interval{0.4, 0.6});
    REQUIRE(two.size() == 2);
    CHECK(two[0].interval.hi == doctest::Approx(0.5));
    CHECK(two[1].interval.lo == doctest::Approx(0.5));

    MapModel v = MapModel::vssv(0.4, 30);
    auto tail_cells = v.cells(1, Interval{0.0, 0.4});
    REQUIRE(tail_cells.size() >= 2);
    CHECK(tail_cells.back().interval.lo == doctest::Approx(0.16));
    CHECK(tail_cells.back().interval.hi == doctest::Approx(0.4));
    CHECK(tail_cells[tail_cells.size() - 2].interval.lo == doctest::Approx(0.064));
}

TEST_CASE("cell explosion cap") {
    MapModel dbl = MapModel::doubling();
    CHECK_THROWS_AS(dbl.cells(10, Interval{0.0, 1.0}, 100), Error);
}

TEST_CASE("separation time") {
    MapModel dbl = MapModel::doubling();
    CHECK(dbl.separation_time(0.1, 0.6, 64) == 1);
    CHECK(dbl.separation_time(0.1, 0.3, 64) == 2);
    CHECK(dbl.separation_time(0.37, 0.37, 64) == kNotSeparated);
}

TEST_CASE("separation time restates the definition") {
    // if s(x,y) = n, the points share a cell at every depth < n
    MapModel v = MapModel::vssv(0.45, 40);
    RngStream rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        double x = 0.01 + 0.99 * rng.uniform01();
        double y = 0.01 + 0.99 * rng.uniform01();
        int s = v.separation_time(x, y, 30);
        if (s <= 1) continue;
        double px = x, py = y;
        for (int d = 1; d < s; ++d) {
            CHECK(v.branch_at(px).index == v.branch_at(py).index);
            px = v.apply(px);
            py = v.apply(py);
        }
        CHECK(v.branch_at(px).index != v.branch_at(py).index);
    }
}

TEST_CASE("image components") {
    MapModel dbl = MapModel::doubling();
    auto one = dbl.image_components(Interval{0.0, 0.5}, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].image.lo == doctest::Approx(0.0));
    CHECK(one[0].image.hi == doctest::Approx(1.0));

    MapModel v = MapModel::vssv(0.4, 30);
    auto w3 = v.image_components(Interval{0.064, 0.16}, 1);
    REQUIRE(w3.size() == 1);
    CHECK(w3[0].image.lo == doctest::Approx(0.0));
    CHECK(w3[0].image.hi == doctest::Approx(0.4));

    auto deep = dbl.image_components(Interval{0.3, 0.31}, 6);
    REQUIRE(deep.size() == 1);
    CHECK(deep[0].image.lo == doctest::Approx(0.2));
    CHECK(deep[0].image.hi == doctest::Approx(0.84));
    CHECK(deep[0].image.contains(Interval{0.25, 0.5}));
}

TEST_CASE("partition consistency and refinement") {
    MapModel v = MapModel::vssv(0.4, 60);
    RngStream rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        double a = rng.uniform01() * 0.9;
        double b = a + 0.05 + rng.uniform01() * (1.0 - a - 0.05);
        if (b > 1.0) b = 1.0;
        Interval w{a, b};
        int n = 1 + static_cast<int>(rng.uniform01() * 3);
        double tail = 0.0;
        auto cs = v.cells(n, w, kDefaultCellCap, &tail);
        double total = tail;
        for (const auto& c : cs) total += c.interval.length();
        CHECK(total == doctest::Approx(w.length()).epsilon(1e-12));

        // each depth n+1 cell lies in exactly one depth-n cell (ownership by
        // majority overlap, robust against boundary slivers)
        auto fine = v.cells(n + 1, w);
        for (const auto& f : fine) {
            int owners = 0;
            for (const auto& c : cs) {
                Interval overlap = c.interval.intersect(f.interval);
                if (!overlap.empty() && overlap.length() > 0.5 * f.interval.length()) ++owners;
            }
            CHECK(owners == 1);
        }
    }
}

TEST_CASE("affine exactness of apply and inverse") {
    for (const MapModel& map : {MapModel::doubling(), MapModel::vssv(0.4, 12)}) {
        RngStream rng(3);
        for (const auto& b : map.branches()) {
            const auto& a = b.affine_action();
            for (int i = 0; i < 10000; ++i) {
                double x = b.domain.lo + rng.uniform01() * b.domain.length();
                if (x <= b.domain.lo) continue;
                double y = a.slope * x + a.intercept;
                double back = (y - a.intercept) / a.slope;
                CHECK(std::abs(back - x) <= 1e-14);
            }
        }
    }
}

TEST_CASE("iterate parameter composes branches") {
    MapModel d2 = MapModel::doubling(2);
    CHECK(d2.branches().size() == 4);
    for (const auto& b : d2.branches()) {
        CHECK(b.affine_action().slope == doctest::Approx(4.0));
        CHECK(b.domain.length() == doctest::Approx(0.25));
        CHECK(b.image.length() == doctest::Approx(1.0));
    }
    CHECK(d2.apply(0.3) == doctest::Approx(0.2));  // 4*0.3 mod 1
}

TEST_CASE("exact rational breakpoints for vssv and doubling") {
    // vssv(2/5): pushforward preserves mass exactly, not just to 1e-12
    RationalVssv v{Rational(2, 5), 40};
    RationalVssvDensity d = v.lebesgue();
    Rational m0 = v.mass(d);
    for (int step = 0; step < 25; ++step) d = v.push(d);
    CHECK(v.mass(d) == m0);

    // the closed-form invariant density is an exact fixed point on branches
    // j <= K-1 (the last slot feels the truncation)
    RationalVssvDensity h = v.invariant();
    RationalVssvDensity ph = v.push(h);
    for (int j = 1; j <= v.truncation - 1; ++j) CHECK(ph.values[j] == h.values[j]);

    // doubling on a dyadic grid: Lebesgue is exactly invariant
    RationalDyadicDensity u{4, std::vector<Rational>(16, Rational(1))};
    RationalDyadicDensity pu = doubling_push(u);
    CHECK(dyadic_mass(pu) == Rational(1));
    for (const auto& val : pu.values) CHECK(val == Rational(1));
}
