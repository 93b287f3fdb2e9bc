#ifndef PEXMAP_STANDARD_FAMILY_HPP
#define PEXMAP_STANDARD_FAMILY_HPP

#include <optional>
#include <vector>

#include "pexmap/density.hpp"
#include "pexmap/interval.hpp"
#include "pexmap/map_model.hpp"

namespace pexmap {

// (W, nu): probability measure with density supported on the interval W.
struct StandardPair {
    Interval support;
    PiecewiseDensity density;  // mass 1 on support, zero outside
    mutable std::optional<double> regularity;  // cached seminorm estimate

    static StandardPair lebesgue(Interval support);
    static StandardPair with_density(Interval support, PiecewiseDensity density);
};

struct WeightedPair {
    StandardPair pair;
    double weight = 0.0;
};

// Weighted countable (truncated) list of pairs. Weights sum to 1 for a
// standard family; operations keep an explicit ledger of dropped mass.
class StandardFamily {
public:
    StandardFamily() = default;
    explicit StandardFamily(std::vector<WeightedPair> entries) : entries_(std::move(entries)) {}
    static StandardFamily single(StandardPair pair, double weight = 1.0);

    const std::vector<WeightedPair>& entries() const { return entries_; }
    std::vector<WeightedPair>& entries() { return entries_; }
    double total_weight() const;
    double dropped_mass() const { return dropped_mass_; }
    void add_dropped_mass(double m) { dropped_mass_ += m; }

    // total measure sum lambda_alpha nu_alpha as a density on [0,1]
    PiecewiseDensity total_density() const;

    // merge entries with identical supports (mergence lemma); lossless for
    // the total measure and for Z
    void merge_identical_supports();

    // drop entries with weight below the floor, recording the mass
    void apply_weight_floor(double floor = 1e-12);

private:
    std::vector<WeightedPair> entries_;
    double dropped_mass_ = 0.0;
};

// characteristic Z function: sum lambda_alpha |W_alpha|^{-q0}; HUGE_VAL if a
// positive weight sits on a zero-length support
double z_value(const StandardFamily& family, double q0);

// sampled lower bound on |log rho|_{W,gamma} in the separation-time metric,
// stratified by shared-cell depth; exact for piecewise-constant densities
// once depth reaches the breakpoint depth
double regularity_seminorm(const MapModel& map, const StandardPair& pair, double gamma,
                           int depth);

struct IterateOptions {
    std::size_t pair_cap = 200000;
    double weight_floor = 1e-12;
};

StandardFamily iterate_family(const MapModel& map, const StandardFamily& family, int n,
                              const IterateOptions& opts = {});

// cut every pair at the listed points (points outside a support are no-ops
// for that pair)
StandardFamily cut_family(const StandardFamily& family, const std::vector<double>& points);

// merge all pairs sharing the given support into one pair
StandardFamily merge_pairs(const StandardFamily& family, Interval support);

// weight of pairs whose support contains U
double covering_ratio(const StandardFamily& family, Interval magnet);

struct SplitResult {
    double lebesgue_weight = 0.0;   // rho_bar * delta_bar
    StandardFamily lebesgue_part;   // equivalent to (U, m_U)
    StandardFamily split_part;
};

// split over the magnet with Lebesgue ratio rho_bar in (0, e^{-C_r});
// pairs supported exactly on U give up a rho_bar fraction of Lebesgue mass
SplitResult split_over_magnet(const StandardFamily& family, Interval magnet, double rho_bar);

struct CouplingConstants;  // defined in coupling.hpp

struct GrowthStep {
    int n = 0;
    double z = 0.0;
    double bound = 0.0;          // e^{2C_r} (Z(G) theta0^n + c0)
    double lebesgue_bound = 0.0; // theta0^n Z + 2 delta0^{-q0}(theta0+...+theta0^n)
    double slack = 0.0;
};

struct GrowthReport {
    std::vector<GrowthStep> steps;
    int properness_step = -1;  // first n with Z <= C_p
    bool all_within_bound = true;
};

GrowthReport growth_report(const MapModel& map, const StandardFamily& family, int n_max,
                           const CouplingConstants& constants);

} // namespace pexmap

#endif
