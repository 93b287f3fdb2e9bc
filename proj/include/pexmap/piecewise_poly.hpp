#ifndef PEXMAP_PIECEWISE_POLY_HPP
#define PEXMAP_PIECEWISE_POLY_HPP

#include <vector>

#include "pexmap/density.hpp"
#include "pexmap/interval.hpp"
#include "pexmap/map_model.hpp"

namespace pexmap {

// Signed piecewise-polynomial function on [0,1]. The class is closed under
// the transfer operator of a piecewise-affine map, which is what makes the
// exact correlation path work for polynomial observables.
class PiecewisePoly {
public:
    PiecewisePoly();  // zero
    static PiecewisePoly constant(double c);
    static PiecewisePoly from_density(const PiecewiseDensity& d);
    static PiecewisePoly from_pieces(std::vector<double> breakpoints,
                                     std::vector<std::vector<double>> coeffs);

    const std::vector<double>& breakpoints() const { return bp_; }
    const std::vector<std::vector<double>>& coefficients() const { return coeffs_; }

    double eval(double x) const;
    double integral() const;
    PiecewisePoly multiply(const PiecewisePoly& o) const;
    // integral of this * x^{-tau} over (0,1]; closed form per piece
    double integral_against_power(double tau) const;

private:
    std::vector<double> bp_;                 // 0 .. 1
    std::vector<std::vector<double>> coeffs_;  // ascending powers per piece
};

// exact transfer-operator step: (L f)(y) = sum over inverse branches
// f(x_alpha)/|T'(x_alpha)|
PiecewisePoly pushforward_poly(const MapModel& map, const PiecewisePoly& f);

} // namespace pexmap

#endif
