#include "pexmap/hofbauer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "pexmap/errors.hpp"

namespace pexmap {

int Tower::find_node(const Interval& iv) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].interval.same_as(iv)) return static_cast<int>(i);
    return -1;
}

namespace {

// successor intervals T(D cap W_k) with the branch index
std::vector<std::pair<int, Interval>> successors(const MapModel& map, const Interval& D) {
    std::vector<std::pair<int, Interval>> out;
    for (const auto& b : map.branches()) {
        Interval piece = D.intersect(b.domain);
        if (piece.empty() || piece.length() <= kPointTol * std::max(1e-30, piece.hi)) continue;
        double y1 = b.apply(std::max(piece.lo, std::nextafter(piece.lo, piece.hi)));
        double y2 = b.apply(piece.hi);
        if (y1 > y2) std::swap(y1, y2);
        if (b.affine()) {
            bool full_lo = points_equal(piece.lo, b.domain.lo);
            bool full_hi = points_equal(piece.hi, b.domain.hi);
            if (b.affine_action().slope > 0) {
                if (full_lo) y1 = b.image.lo;
                if (full_hi) y2 = b.image.hi;
            } else {
                if (full_lo) y2 = b.image.hi;
                if (full_hi) y1 = b.image.lo;
            }
        }
        out.emplace_back(b.index, Interval{y1, y2});
    }
    return out;
}

} // namespace

Tower build_tower(const MapModel& map, int depth, int node_cap) {
    Tower t;
    t.depth = depth;
    t.nodes.push_back(TowerNode{Interval{0.0, 1.0}, 0});
    std::deque<int> frontier{0};
    while (!frontier.empty()) {
        int id = frontier.front();
        frontier.pop_front();
        if (t.nodes[id].level >= depth) continue;
        for (const auto& [k, iv] : successors(map, t.nodes[id].interval)) {
            int found = t.find_node(iv);
            if (found < 0) {
                if (static_cast<int>(t.nodes.size()) >= node_cap) {
                    t.hit_node_cap = true;
                    continue;
                }
                t.nodes.push_back(TowerNode{iv, t.nodes[id].level + 1});
                frontier.push_back(static_cast<int>(t.nodes.size()) - 1);
            }
        }
    }
    // edge pass over every materialized node; unmaterialized targets are -1
    t.edges.assign(t.nodes.size(), {});
    for (std::size_t i = 0; i < t.nodes.size(); ++i)
        for (const auto& [k, iv] : successors(map, t.nodes[i].interval))
            t.edges[i].push_back(TowerEdge{k, t.find_node(iv)});
    return t;
}

namespace {

struct LiftState {
    std::vector<PiecewiseDensity> node_density;  // unnormalized
    double unresolved = 0.0;
};

LiftState propagate(const MapModel& map, const Tower& tower, int n,
                    std::vector<std::vector<double>>* level_history) {
    LiftState st;
    st.node_density.assign(tower.nodes.size(), PiecewiseDensity());
    st.node_density[0] = PiecewiseDensity::uniform();

    int max_level = 0;
    for (const auto& nd : tower.nodes) max_level = std::max(max_level, nd.level);

    auto record = [&](int /*step*/) {
        if (!level_history) return;
        std::vector<double> lm(max_level + 1, 0.0);
        for (std::size_t i = 0; i < tower.nodes.size(); ++i)
            lm[tower.nodes[i].level] += st.node_density[i].mass();
        level_history->push_back(std::move(lm));
    };
    record(0);

    for (int step = 0; step < n; ++step) {
        std::vector<PiecewiseDensity> next(tower.nodes.size());
        for (std::size_t i = 0; i < tower.nodes.size(); ++i) {
            const auto& d = st.node_density[i];
            if (d.mass() <= 0.0) continue;
            const Interval D = tower.nodes[i].interval;
            for (const auto& e : tower.edges[i]) {
                // branch piece inside the node
                const BranchSpec* br = nullptr;
                for (const auto& b : map.branches())
                    if (b.index == e.branch) {
                        br = &b;
                        break;
                    }
                Interval piece = D.intersect(br->domain);
                if (piece.empty()) continue;
                double mass = d.integral(piece);
                if (mass <= 0.0) continue;
                if (e.target < 0) {
                    st.unresolved += mass;
                    continue;
                }
                if (!br->affine())
                    throw Error(ErrorCode::bad_parameter, "tower lift requires affine branches");
                const auto& a = br->affine_action();
                double inv_slope = 1.0 / std::abs(a.slope);
                // push the restriction through the branch
                std::vector<double> bp{0.0, 1.0};
                for (double p : d.breakpoints())
                    if (p >= piece.lo && p <= piece.hi) bp.push_back(a.slope * p + a.intercept);
                bp.push_back(a.slope * piece.lo + a.intercept);
                bp.push_back(a.slope * piece.hi + a.intercept);
                std::sort(bp.begin(), bp.end());
                std::vector<double> dd;
                for (double p : bp) {
                    if (p < 0.0) p = 0.0;
                    if (p > 1.0) p = 1.0;
                    if (dd.empty() || !points_equal(dd.back(), p)) dd.push_back(p);
                }
                if (dd.front() > 0.0) dd.insert(dd.begin(), 0.0);
                if (dd.back() < 1.0) dd.push_back(1.0);
                std::vector<double> vals(dd.size() - 1, 0.0);
                Interval img{a.slope > 0 ? a.slope * piece.lo + a.intercept
                                         : a.slope * piece.hi + a.intercept,
                             a.slope > 0 ? a.slope * piece.hi + a.intercept
                                         : a.slope * piece.lo + a.intercept};
                for (std::size_t j = 0; j + 1 < dd.size(); ++j) {
                    double mid = 0.5 * (dd[j] + dd[j + 1]);
                    if (mid <= img.lo || mid > img.hi) continue;
                    double x = (mid - a.intercept) / a.slope;
                    vals[j] = d.value_at(x) * inv_slope;
                }
                PiecewiseDensity pushed =
                    PiecewiseDensity::from_breakpoints(std::move(dd), std::move(vals));
                next[e.target].add_scaled(pushed, 1.0);
            }
        }
        st.node_density = std::move(next);
        record(step + 1);
    }
    return st;
}

} // namespace

LiftProfile lift_mass_profile(const MapModel& map, const Tower& tower, int n) {
    std::vector<std::vector<double>> history;
    LiftState st = propagate(map, tower, n, &history);
    LiftProfile p;
    p.n = n;
    p.level_mass = history.back();
    p.unresolved = st.unresolved;
    p.cesaro_level_mass.assign(p.level_mass.size(), 0.0);
    // hat m_n = (1/n) sum_{k=0}^{n-1} bar m_k
    int count = std::max(1, n);
    for (int k = 0; k < count && k < static_cast<int>(history.size()); ++k)
        for (std::size_t l = 0; l < history[k].size(); ++l)
            p.cesaro_level_mass[l] += history[k][l] / count;
    return p;
}

PiecewiseDensity lift_projection(const MapModel& map, const Tower& tower, int n) {
    LiftState st = propagate(map, tower, n, nullptr);
    PiecewiseDensity total;
    for (const auto& d : st.node_density) total.add_scaled(d, 1.0);
    return total;
}

StandardFamily tower_pairs(const MapModel& map, const Tower& tower, int n) {
    LiftState st = propagate(map, tower, n, nullptr);
    StandardFamily fam;
    for (std::size_t i = 0; i < tower.nodes.size(); ++i) {
        double m = st.node_density[i].mass();
        if (m <= 0.0) continue;
        StandardPair p;
        p.support = tower.nodes[i].interval;
        p.density = st.node_density[i].scaled(1.0 / m);
        fam.entries().push_back(WeightedPair{std::move(p), m});
    }
    return fam;
}

} // namespace pexmap
