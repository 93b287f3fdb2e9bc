#include "pexmap/density.hpp"

#include <algorithm>
#include <cmath>

#include "pexmap/errors.hpp"

namespace pexmap {

namespace {

// merge a sorted position list with relative dedup, forcing endpoints 0 and 1
std::vector<double> dedup_sorted(std::vector<double> pos) {
    std::sort(pos.begin(), pos.end());
    std::vector<double> out;
    out.reserve(pos.size());
    for (double p : pos) {
        if (p < 0.0) p = 0.0;
        if (p > 1.0) p = 1.0;
        if (out.empty() || !points_equal(out.back(), p)) out.push_back(p);
    }
    if (out.empty() || out.front() > 0.0) out.insert(out.begin(), 0.0);
    else out.front() = 0.0;
    if (out.back() < 1.0) out.push_back(1.0);
    else out.back() = 1.0;
    return out;
}

} // namespace

PiecewiseDensity::PiecewiseDensity() : bp_{0.0, 1.0}, val_{0.0} {}

PiecewiseDensity PiecewiseDensity::uniform() {
    PiecewiseDensity d;
    d.val_ = {1.0};
    d.mass_ = 1.0;
    return d;
}

PiecewiseDensity PiecewiseDensity::indicator(Interval support, double value) {
    std::vector<double> bp = dedup_sorted({0.0, support.lo, support.hi, 1.0});
    std::vector<double> val(bp.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double mid = 0.5 * (bp[i] + bp[i + 1]);
        if (support.contains(mid)) val[i] = value;
    }
    return from_breakpoints(std::move(bp), std::move(val));
}

PiecewiseDensity PiecewiseDensity::from_breakpoints(std::vector<double> breakpoints,
                                                    std::vector<double> values) {
    if (breakpoints.size() < 2 || values.size() + 1 != breakpoints.size())
        throw Error(ErrorCode::bad_parameter, "breakpoints/values size mismatch");
    PiecewiseDensity d;
    d.bp_ = std::move(breakpoints);
    d.val_ = std::move(values);
    if (!points_equal(d.bp_.front(), 0.0) || !points_equal(d.bp_.back(), 1.0))
        throw Error(ErrorCode::bad_parameter, "breakpoints must span [0,1]");
    d.bp_.front() = 0.0;
    d.bp_.back() = 1.0;
    for (std::size_t i = 0; i + 1 < d.bp_.size(); ++i)
        if (d.bp_[i + 1] <= d.bp_[i])
            throw Error(ErrorCode::bad_parameter, "breakpoints not strictly increasing");
    d.recompute_mass();
    return d;
}

void PiecewiseDensity::recompute_mass() {
    double m = 0.0;
    for (std::size_t i = 0; i < val_.size(); ++i) m += val_[i] * (bp_[i + 1] - bp_[i]);
    mass_ = m;
}

double PiecewiseDensity::value_at(double x) const {
    if (x <= 0.0 || x > 1.0) return 0.0;
    auto it = std::lower_bound(bp_.begin(), bp_.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - bp_.begin());
    if (idx == 0) idx = 1;
    if (idx > val_.size()) idx = val_.size();
    return val_[idx - 1];
}

double PiecewiseDensity::integral(Interval window) const {
    if (window.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < val_.size(); ++i) {
        double lo = std::max(bp_[i], window.lo), hi = std::min(bp_[i + 1], window.hi);
        if (hi > lo) s += val_[i] * (hi - lo);
    }
    return s;
}

PiecewiseDensity PiecewiseDensity::restrict_normalized(Interval window) const {
    double m = integral(window);
    if (m <= 0.0) throw Error(ErrorCode::zero_density, "restriction has zero mass");
    std::vector<double> bp{0.0, window.lo, window.hi, 1.0};
    for (double p : bp_)
        if (p > window.lo && p < window.hi) bp.push_back(p);
    bp = dedup_sorted(std::move(bp));
    std::vector<double> val(bp.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double mid = 0.5 * (bp[i] + bp[i + 1]);
        if (window.contains(mid)) val[i] = value_at(mid) / m;
    }
    return from_breakpoints(std::move(bp), std::move(val));
}

PiecewiseDensity PiecewiseDensity::scaled(double factor) const {
    PiecewiseDensity d = *this;
    for (auto& v : d.val_) v *= factor;
    d.mass_ *= factor;
    d.unresolved_mass_ *= factor;
    return d;
}

void PiecewiseDensity::add_scaled(const PiecewiseDensity& other, double factor) {
    std::vector<double> bp;
    bp.reserve(bp_.size() + other.bp_.size());
    bp.insert(bp.end(), bp_.begin(), bp_.end());
    bp.insert(bp.end(), other.bp_.begin(), other.bp_.end());
    bp = dedup_sorted(std::move(bp));
    std::vector<double> val(bp.size() - 1, 0.0);
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double mid = 0.5 * (bp[i] + bp[i + 1]);
        val[i] = value_at(mid) + factor * other.value_at(mid);
    }
    bp_ = std::move(bp);
    val_ = std::move(val);
    unresolved_mass_ += factor * other.unresolved_mass_;
    coarsened_ = coarsened_ || other.coarsened_;
    recompute_mass();
}

double PiecewiseDensity::min_value_on(Interval window) const {
    double m = HUGE_VAL;
    for (std::size_t i = 0; i < val_.size(); ++i) {
        double lo = std::max(bp_[i], window.lo), hi = std::min(bp_[i + 1], window.hi);
        if (hi > lo) m = std::min(m, val_[i]);
    }
    return m;
}

double PiecewiseDensity::max_value_on(Interval window) const {
    double m = -HUGE_VAL;
    for (std::size_t i = 0; i < val_.size(); ++i) {
        double lo = std::max(bp_[i], window.lo), hi = std::min(bp_[i + 1], window.hi);
        if (hi > lo) m = std::max(m, val_[i]);
    }
    return m;
}

namespace {

struct Segment {
    double lo, hi, value;
};

} // namespace

PiecewiseDensity pushforward_once(const MapModel& map, const PiecewiseDensity& d,
                                  std::size_t cap) {
    const double cov = map.coverage_left();
    std::vector<Segment> segs;
    const auto& bp = d.breakpoints();
    const auto& val = d.values();

    // mass below branch coverage has nowhere to go; it stays in place
    if (cov > 0.0) {
        for (std::size_t i = 0; i < val.size() && bp[i] < cov; ++i) {
            double hi = std::min(bp[i + 1], cov);
            if (hi > bp[i] && val[i] != 0.0) segs.push_back(Segment{bp[i], hi, val[i]});
        }
    }

    for (const auto& b : map.branches()) {
        if (!b.affine())
            throw Error(ErrorCode::bad_parameter,
                        "exact pushforward requires a piecewise-affine map");
        const auto& a = b.affine_action();
        double inv_slope = 1.0 / std::abs(a.slope);
        for (std::size_t i = 0; i < val.size(); ++i) {
            if (val[i] == 0.0) continue;
            double lo = std::max(bp[i], b.domain.lo), hi = std::min(bp[i + 1], b.domain.hi);
            if (hi <= lo) continue;
            double y1 = a.slope * lo + a.intercept;
            double y2 = a.slope * hi + a.intercept;
            if (y1 > y2) std::swap(y1, y2);
            y1 = std::max(y1, b.image.lo);
            y2 = std::min(y2, b.image.hi);
            // pin endpoints of full branch pieces to the exact image grid
            bool full_lo = points_equal(lo, b.domain.lo), full_hi = points_equal(hi, b.domain.hi);
            if (a.slope > 0) {
                if (full_lo) y1 = b.image.lo;
                if (full_hi) y2 = b.image.hi;
            } else {
                if (full_lo) y2 = b.image.hi;
                if (full_hi) y1 = b.image.lo;
            }
            if (y2 > y1) segs.push_back(Segment{y1, y2, val[i] * inv_slope});
        }
    }

    // assemble onto the merged grid; mass-conserving by construction
    std::vector<double> pos;
    pos.reserve(2 * segs.size() + 2);
    for (const auto& s : segs) {
        pos.push_back(s.lo);
        pos.push_back(s.hi);
    }
    std::vector<double> grid = dedup_sorted(std::move(pos));
    bool coarse = d.coarsened();
    if (grid.size() > cap) {
        std::size_t n = cap;
        grid.resize(n + 1);
        for (std::size_t i = 0; i <= n; ++i) grid[i] = static_cast<double>(i) / n;
        coarse = true;
    }
    std::vector<double> massv(grid.size() - 1, 0.0);
    for (const auto& s : segs) {
        if (s.hi <= s.lo) continue;
        auto it = std::upper_bound(grid.begin(), grid.end(), s.lo);
        std::size_t i = static_cast<std::size_t>(it - grid.begin());
        if (i > 0) --i;
        for (; i + 1 < grid.size() && grid[i] < s.hi; ++i) {
            double lo = std::max(grid[i], s.lo), hi = std::min(grid[i + 1], s.hi);
            if (hi > lo) massv[i] += s.value * (hi - lo);
        }
    }
    std::vector<double> values(massv.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = massv[i] / (grid[i + 1] - grid[i]);
    PiecewiseDensity out = PiecewiseDensity::from_breakpoints(std::move(grid), std::move(values));
    out.coarsened_ = coarse;
    if (cov > 0.0) out.unresolved_mass_ = out.integral(Interval{0.0, cov});
    return out;
}

PiecewiseDensity pushforward(const MapModel& map, const PiecewiseDensity& density, int steps,
                             std::size_t breakpoint_cap) {
    PiecewiseDensity d = density;
    for (int s = 0; s < steps; ++s) d = pushforward_once(map, d, breakpoint_cap);
    return d;
}

double tv_distance(const PiecewiseDensity& d1, const PiecewiseDensity& d2) {
    return 0.5 * l1_distance(d1, d2, Interval{0.0, 1.0});
}

double l1_distance(const PiecewiseDensity& d1, const PiecewiseDensity& d2, Interval window) {
    std::vector<double> bp;
    bp.reserve(d1.breakpoints().size() + d2.breakpoints().size());
    bp.insert(bp.end(), d1.breakpoints().begin(), d1.breakpoints().end());
    bp.insert(bp.end(), d2.breakpoints().begin(), d2.breakpoints().end());
    std::sort(bp.begin(), bp.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double lo = std::max(bp[i], window.lo), hi = std::min(bp[i + 1], window.hi);
        if (hi <= lo) continue;
        double mid = 0.5 * (lo + hi);
        s += std::abs(d1.value_at(mid) - d2.value_at(mid)) * (hi - lo);
    }
    return s;
}

double vssv_branch_mass(double lambda, int k) {
    return (1.0 - 2.0 * lambda) / lambda * std::pow(lambda / (1.0 - lambda), k);
}

PiecewiseDensity closed_form_vssv_density(double lambda, int truncation) {
    if (!(lambda > 0.0 && lambda < 0.5))
        throw Error(ErrorCode::no_acip, "vSSV admits an acip iff lambda in (0, 1/2)");
    std::vector<double> desc;
    desc.reserve(truncation + 2);
    desc.push_back(1.0);
    double p = 1.0;
    for (int k = 1; k <= truncation; ++k) {
        p *= lambda;
        desc.push_back(p);
    }
    desc.push_back(0.0);
    std::reverse(desc.begin(), desc.end());
    std::vector<double> values(desc.size() - 1, 0.0);
    // piece (lambda^k, lambda^{k-1}] carries (1-2l)(1-l)^{-(k+1)}
    double dens = (1.0 - 2.0 * lambda) / ((1.0 - lambda) * (1.0 - lambda));
    for (int k = 1; k <= truncation; ++k) {
        values[values.size() - k] = dens;
        dens /= (1.0 - lambda);
    }
    return PiecewiseDensity::from_breakpoints(std::move(desc), std::move(values));
}

} // namespace pexmap
