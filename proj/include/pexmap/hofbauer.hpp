#ifndef PEXMAP_HOFBAUER_HPP
#define PEXMAP_HOFBAUER_HPP

#include <vector>

#include "pexmap/density.hpp"
#include "pexmap/interval.hpp"
#include "pexmap/map_model.hpp"
#include "pexmap/standard_family.hpp"

namespace pexmap {

struct TowerNode {
    Interval interval;
    int level = 0;  // min{n : D in D_n}
};

struct TowerEdge {
    int branch = 0;  // branch index k
    int target = -1; // node id, -1 when the successor was not materialized
};

struct Tower {
    std::vector<TowerNode> nodes;            // node 0 is the base M
    std::vector<std::vector<TowerEdge>> edges;
    bool hit_node_cap = false;
    int depth = 0;

    int find_node(const Interval& iv) const;
};

// Breadth-first closure of D_0 = {M} under D -> T(D cap W_k), deduplicating
// nodes by interval identity.
Tower build_tower(const MapModel& map, int depth, int node_cap = 100000);

struct LiftProfile {
    int n = 0;
    std::vector<double> level_mass;         // mass of bar m_n per level
    std::vector<double> cesaro_level_mass;  // Cesaro means hat m_n per level
    double unresolved = 0.0;                // escaped the truncated tower
};

// Lifted Lebesgue measure after n steps of the tower map, starting from the
// base copy of M.
LiftProfile lift_mass_profile(const MapModel& map, const Tower& tower, int n);

// Projection of the lifted measure back to M (should equal T^n_* m).
PiecewiseDensity lift_projection(const MapModel& map, const Tower& tower, int n);

// Per-node normalized densities of bar m_n, exportable for inspection.
StandardFamily tower_pairs(const MapModel& map, const Tower& tower, int n);

} // namespace pexmap

#endif
