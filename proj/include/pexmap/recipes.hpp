#ifndef PEXMAP_RECIPES_HPP
#define PEXMAP_RECIPES_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pexmap/map_model.hpp"
#include "pexmap/rng.hpp"
#include "pexmap/standard_family.hpp"

namespace pexmap {

struct CheckLine {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RecipeResult {
    std::string recipe;
    std::vector<CheckLine> checks;
    double seconds = 0.0;
    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// named reproduction recipes; out_dir == "" suppresses artifact files
RecipeResult repro_vssv_density(const std::string& out_dir);
RecipeResult repro_vssv_threshold();
RecipeResult repro_rychlik_fail();
RecipeResult repro_doubling_corr();
RecipeResult repro_unbounded_corr();
RecipeResult repro_growth_lemma(std::uint64_t seed);
RecipeResult repro_coupling(const std::string& out_dir);
RecipeResult repro_tower();
RecipeResult repro_doubling_clt(std::uint64_t seed);

// seeded random standard family on a grid-aligned truncated map: random
// grid supports, occasional one-jump densities (jump on a depth-1 cell
// boundary, log-jump <= c_r * gamma), random extra cuts
StandardFamily random_standard_family(const MapModel& map, RngStream& rng, double c_r = 1.0,
                                      double gamma = 0.5);

} // namespace pexmap

#endif
