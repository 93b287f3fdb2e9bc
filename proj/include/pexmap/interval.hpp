#ifndef PEXMAP_INTERVAL_HPP
#define PEXMAP_INTERVAL_HPP

#include <algorithm>
#include <cmath>

namespace pexmap {

// Relative tolerance used for breakpoint dedup and interval identity.
// Relative (not absolute) so that geometric grids like {lambda^k} near 0
// keep their distinct points.
inline constexpr double kPointTol = 1e-12;

inline bool points_equal(double a, double b) {
    return std::abs(a - b) <= kPointTol * std::max({1e-30, std::abs(a), std::abs(b)});
}

// Half-open interval (lo, hi]. The whole space is (0, 1]; {0} is a null set
// outside every branch.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool empty() const { return hi <= lo; }
    bool contains(double x) const { return x > lo && x <= hi; }

    // superset up to point tolerance
    bool contains(const Interval& o) const {
        return (lo <= o.lo || points_equal(lo, o.lo)) && (o.hi <= hi || points_equal(o.hi, hi));
    }
    bool same_as(const Interval& o) const { return points_equal(lo, o.lo) && points_equal(hi, o.hi); }

    Interval intersect(const Interval& o) const {
        return Interval{std::max(lo, o.lo), std::min(hi, o.hi)};
    }
};

inline Interval unit_interval() { return Interval{0.0, 1.0}; }

} // namespace pexmap

#endif
