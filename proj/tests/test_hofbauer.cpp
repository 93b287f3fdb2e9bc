#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "pexmap/density.hpp"
#include "pexmap/hofbauer.hpp"

using namespace pexmap;

TEST_CASE("doubling collapses to a one-node tower") {
    MapModel dbl = MapModel::doubling();
    Tower t = build_tower(dbl, 8);
    REQUIRE(t.nodes.size() == 1);
    CHECK(t.nodes[0].level == 0);
    REQUIRE(t.edges[0].size() == 2);
    CHECK(t.edges[0][0].target == 0);
    CHECK(t.edges[0][1].target == 0);

    LiftProfile p = lift_mass_profile(dbl, t, 25);
    REQUIRE(p.level_mass.size() == 1);
    CHECK(p.level_mass[0] == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("vssv tower structure") {
    MapModel v = MapModel::vssv(0.4, 10);
    Tower t = build_tower(v, 6);
    // M plus (0, 0.4^j] for j = 1..8 (branch k >= 3 lands on (0, 0.4^{k-2}])
    REQUIRE(t.nodes.size() == 9);
    CHECK(t.nodes[0].level == 0);
    int found = 0;
    for (std::size_t i = 1; i < t.nodes.size(); ++i) {
        CHECK(t.nodes[i].level == 1);
        CHECK(t.nodes[i].interval.lo == doctest::Approx(0.0));
        for (int j = 1; j <= 8; ++j)
            if (points_equal(t.nodes[i].interval.hi, std::pow(0.4, j))) ++found;
    }
    CHECK(found == 8);

    // top-branch edge from (0, b_j] reaches (0, b_{j-1}], ending at M
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        const auto& node = t.nodes[i];
        if (node.level == 0) continue;
        // the widest branch inside (0, b_j] is W_{j+1}, mapping onto (0, b_{j-1}]
        double hi = node.interval.hi;
        int j = static_cast<int>(std::round(std::log(hi) / std::log(0.4)));
        double target_hi = std::pow(0.4, j - 1);
        bool ok = false;
        for (const auto& e : t.edges[i]) {
            if (e.target < 0) continue;
            if (points_equal(t.nodes[e.target].interval.hi, target_hi)) ok = true;
        }
        CHECK(ok);
    }
}

TEST_CASE("geometric tail tower nodes") {
    LambdaRule idx;
    idx.kind = LambdaRule::Kind::index;
    MapModel gt = MapModel::geometric_tail(0.5, idx, 12);
    Tower t = build_tower(gt, 4);
    // images (0, k 2^{-k}] dedupe: k = 1 and k = 2 both give (0, 1/2]
    for (std::size_t i = 1; i < t.nodes.size(); ++i) {
        CHECK(t.nodes[i].interval.lo == doctest::Approx(0.0));
        CHECK(t.nodes[i].level >= 1);
    }
    bool half = false;
    int half_count = 0;
    for (const auto& n : t.nodes)
        if (points_equal(n.interval.hi, 0.5) && points_equal(n.interval.lo, 0.0)) {
            half = true;
            ++half_count;
        }
    CHECK(half);
    CHECK(half_count == 1);
}

TEST_CASE("markov property of edges") {
    MapModel v = MapModel::vssv(0.4, 10);
    Tower t = build_tower(v, 6);
    for (std::size_t i = 0; i < t.nodes.size(); ++i) {
        for (const auto& e : t.edges[i]) {
            REQUIRE(e.target >= 0);
            // recompute T(D cap W_k) and compare against the target node
            const BranchSpec* br = nullptr;
            for (const auto& b : v.branches())
                if (b.index == e.branch) br = &b;
            REQUIRE(br != nullptr);
            Interval piece = t.nodes[i].interval.intersect(br->domain);
            REQUIRE(!piece.empty());
            const auto& a = br->affine_action();
            Interval img{a.slope * piece.lo + a.intercept, a.slope * piece.hi + a.intercept};
            CHECK(t.nodes[e.target].interval.same_as(img));
        }
    }
}

TEST_CASE("lift mass profile on vssv") {
    MapModel v = MapModel::vssv(0.4, 60);
    Tower t = build_tower(v, 6);
    LiftProfile p1 = lift_mass_profile(v, t, 1);
    REQUIRE(p1.level_mass.size() == 2);
    CHECK(p1.level_mass[0] == doctest::Approx(0.84).epsilon(1e-12));
    CHECK(p1.level_mass[1] == doctest::Approx(0.16).epsilon(1e-12));

    // two-level tower: nothing above level 1, trivially tight
    LiftProfile p9 = lift_mass_profile(v, t, 9);
    CHECK(p9.level_mass.size() == 2);
    CHECK(p9.level_mass[0] + p9.level_mass[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("projection identity") {
    MapModel v = MapModel::vssv(0.4, 60);
    Tower t = build_tower(v, 6);
    for (int n : {1, 3, 7, 15}) {
        PiecewiseDensity proj = lift_projection(v, t, n);
        PiecewiseDensity direct = pushforward(v, PiecewiseDensity::uniform(), n);
        CHECK(tv_distance(proj, direct) <= 1e-10);
    }
}

TEST_CASE("level profile converges") {
    MapModel v = MapModel::vssv(0.4, 60);
    Tower t = build_tower(v, 6);
    LiftProfile a = lift_mass_profile(v, t, 200);
    LiftProfile b = lift_mass_profile(v, t, 400);
    REQUIRE(a.level_mass.size() == b.level_mass.size());
    // the lifted profile itself converges exponentially
    for (std::size_t l = 0; l < a.level_mass.size(); ++l)
        CHECK(std::abs(a.level_mass[l] - b.level_mass[l]) <= 1e-4);
    // Cesaro means trail behind at their O(1/n) pace but tighten too
    LiftProfile c50 = lift_mass_profile(v, t, 50);
    LiftProfile c100 = lift_mass_profile(v, t, 100);
    double drift_early = 0.0, drift_late = 0.0;
    for (std::size_t l = 0; l < a.level_mass.size(); ++l) {
        drift_early += std::abs(c50.cesaro_level_mass[l] - c100.cesaro_level_mass[l]);
        drift_late += std::abs(a.cesaro_level_mass[l] - b.cesaro_level_mass[l]);
    }
    CHECK(drift_late < drift_early);
}

TEST_CASE("tightness decay for the geometric tail family") {
    LambdaRule idx;
    idx.kind = LambdaRule::Kind::index;
    MapModel gt = MapModel::geometric_tail(0.5, idx, 16);
    Tower t = build_tower(gt, 8, 4000);
    LiftProfile p = lift_mass_profile(gt, t, 12);
    // mass above level L decays in L
    std::vector<double> above(p.level_mass.size(), 0.0);
    double acc = 0.0;
    for (std::size_t l = p.level_mass.size(); l-- > 0;) {
        acc += p.level_mass[l];
        above[l] = acc;
    }
    for (std::size_t l = 2; l + 1 < above.size(); ++l) CHECK(above[l + 1] <= above[l] + 1e-12);
    if (above.size() >= 5) CHECK(above[4] < above[1]);
}

TEST_CASE("node cap flags a partial tower") {
    LambdaRule idx;
    idx.kind = LambdaRule::Kind::index;
    MapModel gt = MapModel::geometric_tail(0.5, idx, 16);
    Tower t = build_tower(gt, 10, 5);
    CHECK(t.hit_node_cap);
    LiftProfile p = lift_mass_profile(gt, t, 6);
    CHECK(p.unresolved > 0.0);
}

TEST_CASE("tower pairs export") {
    MapModel v = MapModel::vssv(0.4, 40);
    Tower t = build_tower(v, 6);
    StandardFamily fam = tower_pairs(v, t, 5);
    CHECK(fam.total_weight() == doctest::Approx(1.0).epsilon(1e-10));
    for (const auto& e : fam.entries())
        CHECK(e.pair.density.integral(e.pair.support) == doctest::Approx(1.0).epsilon(1e-9));
}
