#include "pexmap/piecewise_poly.hpp"

#include <algorithm>
#include <cmath>

#include "pexmap/errors.hpp"

namespace pexmap {

namespace {

std::vector<double> dedup_sorted(std::vector<double> pos) {
    std::sort(pos.begin(), pos.end());
    std::vector<double> out;
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

double eval_poly(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
}

// coefficients of p((y - b)/s) = p(u) with u = y/s - b/s
std::vector<double> compose_affine(const std::vector<double>& p, double inv_s, double shift) {
    // q(y) = sum_k p_k (inv_s * y + shift)^k
    std::vector<double> q(p.size(), 0.0);
    std::vector<double> base{1.0};  // (inv_s y + shift)^k, ascending
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k] != 0.0)
            for (std::size_t i = 0; i < base.size(); ++i) q[i] += p[k] * base[i];
        // multiply base by (inv_s y + shift)
        std::vector<double> nb(base.size() + 1, 0.0);
        for (std::size_t i = 0; i < base.size(); ++i) {
            nb[i] += base[i] * shift;
            nb[i + 1] += base[i] * inv_s;
        }
        base = std::move(nb);
    }
    return q;
}

} // namespace

PiecewisePoly::PiecewisePoly() : bp_{0.0, 1.0}, coeffs_{{0.0}} {}

PiecewisePoly PiecewisePoly::constant(double c) {
    PiecewisePoly p;
    p.coeffs_ = {{c}};
    return p;
}

PiecewisePoly PiecewisePoly::from_density(const PiecewiseDensity& d) {
    PiecewisePoly p;
    p.bp_ = d.breakpoints();
    p.coeffs_.clear();
    for (double v : d.values()) p.coeffs_.push_back({v});
    return p;
}

PiecewisePoly PiecewisePoly::from_pieces(std::vector<double> breakpoints,
                                         std::vector<std::vector<double>> coeffs) {
    if (breakpoints.size() != coeffs.size() + 1)
        throw Error(ErrorCode::bad_parameter, "pieces/breakpoints mismatch");
    PiecewisePoly p;
    p.bp_ = std::move(breakpoints);
    p.coeffs_ = std::move(coeffs);
    return p;
}

double PiecewisePoly::eval(double x) const {
    if (x <= 0.0 || x > 1.0) return 0.0;
    auto it = std::lower_bound(bp_.begin(), bp_.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - bp_.begin());
    if (idx == 0) idx = 1;
    if (idx > coeffs_.size()) idx = coeffs_.size();
    return eval_poly(coeffs_[idx - 1], x);
}

double PiecewisePoly::integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const auto& c = coeffs_[i];
        double a = bp_[i], b = bp_[i + 1];
        double pa = 1.0, pb = 1.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            pa *= a;
            pb *= b;
            s += c[k] * (pb - pa) / (k + 1.0);
        }
    }
    return s;
}

PiecewisePoly PiecewisePoly::multiply(const PiecewisePoly& o) const {
    std::vector<double> bp;
    bp.insert(bp.end(), bp_.begin(), bp_.end());
    bp.insert(bp.end(), o.bp_.begin(), o.bp_.end());
    bp = dedup_sorted(std::move(bp));
    std::vector<std::vector<double>> coeffs;
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
        double mid = 0.5 * (bp[i] + bp[i + 1]);
        auto ia = std::lower_bound(bp_.begin(), bp_.end(), mid) - bp_.begin();
        auto ib = std::lower_bound(o.bp_.begin(), o.bp_.end(), mid) - o.bp_.begin();
        ia = std::max<std::ptrdiff_t>(1, ia);
        ib = std::max<std::ptrdiff_t>(1, ib);
        const auto& ca = coeffs_[std::min<std::size_t>(ia - 1, coeffs_.size() - 1)];
        const auto& cb = o.coeffs_[std::min<std::size_t>(ib - 1, o.coeffs_.size() - 1)];
        std::vector<double> prod(ca.size() + cb.size() - 1, 0.0);
        for (std::size_t x = 0; x < ca.size(); ++x)
            for (std::size_t y = 0; y < cb.size(); ++y) prod[x + y] += ca[x] * cb[y];
        coeffs.push_back(std::move(prod));
    }
    return from_pieces(std::move(bp), std::move(coeffs));
}

double PiecewisePoly::integral_against_power(double tau) const {
    if (tau >= 1.0) throw Error(ErrorCode::non_integrable, "x^{-tau} needs tau < 1");
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
        const auto& c = coeffs_[i];
        double a = bp_[i], b = bp_[i + 1];
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (c[k] == 0.0) continue;
            double e = k + 1.0 - tau;  // integral of x^{k - tau}
            double pb = std::pow(b, e);
            double pa = (a <= 0.0) ? 0.0 : std::pow(a, e);
            s += c[k] * (pb - pa) / e;
        }
    }
    return s;
}

PiecewisePoly pushforward_poly(const MapModel& map, const PiecewisePoly& f) {
    struct Seg {
        double lo, hi;
        std::vector<double> coeffs;
    };
    std::vector<Seg> segs;
    const auto& bp = f.breakpoints();
    const auto& cf = f.coefficients();
    for (const auto& b : map.branches()) {
        if (!b.affine())
            throw Error(ErrorCode::bad_parameter, "exact poly pushforward needs affine branches");
        const auto& a = b.affine_action();
        double inv_s = 1.0 / a.slope;  // signed
        double shift = -a.intercept / a.slope;
        double scale = 1.0 / std::abs(a.slope);
        for (std::size_t i = 0; i < cf.size(); ++i) {
            double lo = std::max(bp[i], b.domain.lo), hi = std::min(bp[i + 1], b.domain.hi);
            if (hi <= lo) continue;
            double y1 = a.slope * lo + a.intercept, y2 = a.slope * hi + a.intercept;
            if (y1 > y2) std::swap(y1, y2);
            y1 = std::max(y1, b.image.lo);
            y2 = std::min(y2, b.image.hi);
            if (points_equal(lo, b.domain.lo))
                (a.slope > 0 ? y1 : y2) = a.slope > 0 ? b.image.lo : b.image.hi;
            if (points_equal(hi, b.domain.hi))
                (a.slope > 0 ? y2 : y1) = a.slope > 0 ? b.image.hi : b.image.lo;
            if (y2 <= y1) continue;
            // contribution f((y - intercept)/slope) / |slope|
            auto comp = compose_affine(cf[i], inv_s, shift);
            for (auto& v : comp) v *= scale;
            segs.push_back(Seg{y1, y2, std::move(comp)});
        }
    }
    std::vector<double> grid;
    for (const auto& s : segs) {
        grid.push_back(s.lo);
        grid.push_back(s.hi);
    }
    grid = dedup_sorted(std::move(grid));
    std::vector<std::vector<double>> out(grid.size() - 1);
    for (auto& c : out) c = {0.0};
    for (const auto& s : segs) {
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            double mid = 0.5 * (grid[i] + grid[i + 1]);
            if (mid <= s.lo || mid > s.hi) continue;
            if (out[i].size() < s.coeffs.size()) out[i].resize(s.coeffs.size(), 0.0);
            for (std::size_t k = 0; k < s.coeffs.size(); ++k) out[i][k] += s.coeffs[k];
        }
    }
    return PiecewisePoly::from_pieces(std::move(grid), std::move(out));
}

} // namespace pexmap
