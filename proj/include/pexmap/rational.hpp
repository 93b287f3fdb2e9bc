#ifndef PEXMAP_RATIONAL_HPP
#define PEXMAP_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>
#include <vector>

namespace pexmap {

using Rational = boost::multiprecision::cpp_rational;

// Exact-rational transfer action for the two generator families whose
// breakpoints are all rational. Densities are branch-aligned: for the vSSV
// map, values[k] is the constant density on W_k = (l^k, l^{k-1}] for
// k = 1..K and values[0] the density on the sub-truncation piece (0, l^K].
struct RationalVssvDensity {
    std::vector<Rational> values;  // size K+1
};

struct RationalVssv {
    Rational lambda;
    int truncation;

    RationalVssvDensity lebesgue() const;
    RationalVssvDensity invariant() const;  // the v_k / a_k closed form
    RationalVssvDensity push(const RationalVssvDensity& d) const;
    Rational mass(const RationalVssvDensity& d) const;
    Rational branch_length(int k) const;  // a_k, k >= 1; k = 0 gives l^K
};

// Doubling map on a dyadic grid of 2^level equal cells.
struct RationalDyadicDensity {
    int level;
    std::vector<Rational> values;  // size 2^level
};

RationalDyadicDensity doubling_push(const RationalDyadicDensity& d);
Rational dyadic_mass(const RationalDyadicDensity& d);

// Rychlik's no-acip example a_k = 2^{-k}, Lambda_k = 2. Branch-aligned
// densities: values[k] on W_k = (2^{-k}, 2^{-k+1}], values[0] on the
// sub-truncation piece (0, 2^{-K}].
struct RationalRychlik {
    int truncation;

    RationalVssvDensity lebesgue() const;
    RationalVssvDensity push(const RationalVssvDensity& d) const;
    Rational mass(const RationalVssvDensity& d) const;
    Rational mass_below(const RationalVssvDensity& d, const Rational& x) const;
};

} // namespace pexmap

#endif
