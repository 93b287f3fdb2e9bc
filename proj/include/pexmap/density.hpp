#ifndef PEXMAP_DENSITY_HPP
#define PEXMAP_DENSITY_HPP

#include <cstddef>
#include <vector>

#include "pexmap/interval.hpp"
#include "pexmap/map_model.hpp"

namespace pexmap {

// Piecewise-constant density on [0,1]: breakpoints_ strictly increasing with
// breakpoints_.front() == 0 and .back() == 1, one value per piece.
// Pushforward under a piecewise-affine map keeps the class closed, so the
// whole measure engine is exact modulo branch truncation.
class PiecewiseDensity {
public:
    PiecewiseDensity();  // zero density
    static PiecewiseDensity uniform();
    static PiecewiseDensity indicator(Interval support, double value);
    static PiecewiseDensity from_breakpoints(std::vector<double> breakpoints,
                                             std::vector<double> values);

    const std::vector<double>& breakpoints() const { return bp_; }
    const std::vector<double>& values() const { return val_; }
    std::size_t piece_count() const { return val_.size(); }

    double mass() const { return mass_; }
    double value_at(double x) const;
    double integral(Interval window) const;

    // restriction to a window renormalized to probability mass
    PiecewiseDensity restrict_normalized(Interval window) const;
    PiecewiseDensity scaled(double factor) const;

    // in-place accumulate: this += factor * other (merged breakpoints)
    void add_scaled(const PiecewiseDensity& other, double factor);

    double min_value_on(Interval window) const;
    double max_value_on(Interval window) const;

    bool coarsened() const { return coarsened_; }
    double unresolved_mass() const { return unresolved_mass_; }
    void mark_unresolved(double m) { unresolved_mass_ += m; }

private:
    void recompute_mass();
    friend PiecewiseDensity pushforward_once(const MapModel&, const PiecewiseDensity&, std::size_t);

    std::vector<double> bp_;
    std::vector<double> val_;
    double mass_ = 0.0;
    bool coarsened_ = false;
    double unresolved_mass_ = 0.0;  // mass parked below truncation, folded into first piece
};

inline constexpr std::size_t kDefaultBreakpointCap = 200'000;

// Exact pushforward under the map; a step moves every covered piece through
// every branch. Mass sitting below truncation coverage stays in place (it has
// no branch to move through) and is reported through unresolved_mass().
PiecewiseDensity pushforward(const MapModel& map, const PiecewiseDensity& density, int steps,
                             std::size_t breakpoint_cap = kDefaultBreakpointCap);
PiecewiseDensity pushforward_once(const MapModel& map, const PiecewiseDensity& density,
                                  std::size_t breakpoint_cap);

// Total variation distance (1/2) * int |d1 - d2| dm, exact on merged breakpoints.
double tv_distance(const PiecewiseDensity& d1, const PiecewiseDensity& d2);

// L1 distance restricted to a window.
double l1_distance(const PiecewiseDensity& d1, const PiecewiseDensity& d2, Interval window);

// Invariant density of the vSSV map for lambda in (0, 1/2): constant
// (1-2l)(1-l)^{-(k+1)} on each branch W_k, k <= K.
PiecewiseDensity closed_form_vssv_density(double lambda, int truncation);

// Branch mass v_k = ((1-2l)/l)(l/(1-l))^k of the vSSV invariant measure.
double vssv_branch_mass(double lambda, int k);

} // namespace pexmap

#endif
