#include "pexmap/map_model.hpp"

#include <algorithm>
#include <cmath>

namespace pexmap {

double BranchSpec::apply(double x) const {
    if (affine()) {
        const auto& a = affine_action();
        double y = a.slope * x + a.intercept;
        // snap fp drift back into the exact image
        if (y > image.hi) y = image.hi;
        if (y < image.lo) y = image.lo;
        return y;
    }
    return std::get<GeneralAction>(action).forward(x);
}

double BranchSpec::derivative_at(double x) const {
    if (affine()) return affine_action().slope;
    return std::get<GeneralAction>(action).derivative(x);
}

namespace {

Interval affine_image(const Interval& dom, double slope, double intercept) {
    double a = slope * dom.lo + intercept;
    double b = slope * dom.hi + intercept;
    if (a > b) std::swap(a, b);
    return Interval{a, b};
}

BranchSpec make_affine_branch(int index, Interval dom, double slope, double intercept) {
    BranchSpec b;
    b.index = index;
    b.domain = dom;
    b.action = AffineAction{slope, intercept};
    b.image = affine_image(dom, slope, intercept);
    // clamp ulp overshoot at the endpoints of (0,1]
    if (b.image.hi > 1.0 && points_equal(b.image.hi, 1.0)) b.image.hi = 1.0;
    if (b.image.lo < 0.0 && points_equal(b.image.lo, 0.0)) b.image.lo = 0.0;
    return b;
}

} // namespace

void MapModel::finalize() {
    if (branches_.empty()) throw Error(ErrorCode::bad_parameter, "map has no branches");
    std::sort(branches_.begin(), branches_.end(),
              [](const BranchSpec& a, const BranchSpec& b) { return a.domain.lo < b.domain.lo; });

    piecewise_affine_ = true;
    double max_slope = 0.0;
    for (std::size_t i = 0; i < branches_.size(); ++i) {
        const auto& b = branches_[i];
        if (b.domain.empty()) throw Error(ErrorCode::bad_parameter, "empty branch domain");
        if (b.domain.lo < -kPointTol || b.domain.hi > 1.0 + kPointTol)
            throw Error(ErrorCode::bad_parameter, "branch domain outside (0,1]");
        if (b.image.lo < -kPointTol || b.image.hi > 1.0 + kPointTol)
            throw Error(ErrorCode::bad_parameter, "branch image outside (0,1]");
        if (i + 1 < branches_.size() && !points_equal(b.domain.hi, branches_[i + 1].domain.lo))
            throw Error(ErrorCode::bad_parameter, "branch domains not contiguous");
        if (b.affine()) {
            double s = std::abs(b.affine_action().slope);
            if (s < 1.0 - kPointTol)
                throw Error(ErrorCode::bad_parameter, "contracting branch (|slope| < 1)");
            max_slope = std::max(max_slope, s);
        } else {
            piecewise_affine_ = false;
            for (int j = 1; j <= 8; ++j) {
                double x = b.domain.lo + b.domain.length() * j / 8.0;
                double s = std::abs(b.derivative_at(x));
                if (s < 1.0 - 1e-9)
                    throw Error(ErrorCode::bad_parameter, "contracting branch (|T'| < 1)");
                max_slope = std::max(max_slope, s);
            }
        }
    }
    if (max_slope <= 1.0 + kPointTol)
        throw Error(ErrorCode::bad_parameter, "map is nowhere expanding (|Lambda|>1 fails)");
    if (!points_equal(branches_.back().domain.hi, 1.0))
        throw Error(ErrorCode::bad_parameter, "branches do not reach 1");

    // branches tile (coverage_left, 1], so the untruncated tail is exactly
    // the uncovered left stub
    coverage_left_ = std::max(0.0, branches_.front().domain.lo);
    tail_mass_ = coverage_left_;
}

MapModel MapModel::doubling(int iterate) { return dyadic(2, iterate); }

MapModel MapModel::dyadic(int m, int iterate) {
    if (m < 2) throw Error(ErrorCode::bad_parameter, "dyadic map needs m >= 2");
    MapModel map;
    map.gen_.family = (m == 2) ? Family::doubling : Family::dyadic;
    map.gen_.dyadic_m = m;
    map.truncation_ = m;
    for (int j = 1; j <= m; ++j) {
        Interval dom{static_cast<double>(j - 1) / m, static_cast<double>(j) / m};
        map.branches_.push_back(
            make_affine_branch(j, dom, static_cast<double>(m), static_cast<double>(-(j - 1))));
    }
    map.finalize();
    return iterate > 1 ? compose_iterate(map, iterate) : map;
}

MapModel MapModel::vssv(double lambda, int truncation, int iterate) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw Error(ErrorCode::bad_parameter, "vssv needs lambda in (0,1)");
    if (truncation < 2) throw Error(ErrorCode::bad_parameter, "vssv truncation too small");
    MapModel map;
    map.gen_.family = Family::vssv;
    map.gen_.lambda = lambda;
    map.truncation_ = truncation;
    // cache powers once so every consumer sees identical doubles
    std::vector<double> pow(truncation + 1);
    pow[0] = 1.0;
    for (int k = 1; k <= truncation; ++k) pow[k] = pow[k - 1] * lambda;
    const double slope1 = 1.0 / (1.0 - lambda);
    const double slopek = 1.0 / (lambda * (1.0 - lambda));
    for (int k = 1; k <= truncation; ++k) {
        double bk = pow[k], bk1 = pow[k - 1];
        double slope = (k == 1) ? slope1 : slopek;
        auto b = make_affine_branch(k, Interval{bk, bk1}, slope, -slope * bk);
        // images are (0, b_{k-2}] exactly; pin them to the cached grid
        b.image.lo = 0.0;
        b.image.hi = (k <= 2) ? 1.0 : pow[k - 2];
        map.branches_.push_back(b);
    }
    map.finalize();
    return iterate > 1 ? compose_iterate(map, iterate) : map;
}

MapModel MapModel::geometric_tail(double tail_ratio, LambdaRule rule, int truncation, int iterate) {
    if (!(tail_ratio > 0.0 && tail_ratio < 1.0))
        throw Error(ErrorCode::bad_parameter, "geometric_tail ratio in (0,1)");
    MapModel map;
    map.gen_.family = Family::geometric_tail;
    map.gen_.tail_ratio = tail_ratio;
    map.gen_.lambda_rule = rule;
    map.truncation_ = truncation;
    // a_k = (1-r) r^{k-1}, b_k = r^k
    std::vector<double> pow(truncation + 1);
    pow[0] = 1.0;
    for (int k = 1; k <= truncation; ++k) pow[k] = pow[k - 1] * tail_ratio;
    for (int k = 1; k <= truncation; ++k) {
        double slope = rule.lambda_k(k);
        auto b = make_affine_branch(k, Interval{pow[k], pow[k - 1]}, slope, -slope * pow[k]);
        b.image.lo = 0.0;
        map.branches_.push_back(b);
    }
    map.finalize();
    return iterate > 1 ? compose_iterate(map, iterate) : map;
}

MapModel MapModel::explicit_map(std::vector<BranchSpec> branches, int iterate) {
    MapModel map;
    map.gen_.family = Family::explicit_list;
    map.truncation_ = static_cast<int>(branches.size());
    map.branches_ = std::move(branches);
    for (auto& b : map.branches_) {
        if (!b.affine() && b.image.empty()) {
            const auto& g = std::get<GeneralAction>(b.action);
            double ia = g.forward(b.domain.lo), ib = g.forward(b.domain.hi);
            if (ia > ib) std::swap(ia, ib);
            b.image = Interval{ia, ib};
        }
    }
    map.finalize();
    return iterate > 1 ? compose_iterate(map, iterate) : map;
}

MapModel MapModel::compose_iterate(const MapModel& base, int m) {
    if (!base.piecewise_affine_)
        throw Error(ErrorCode::bad_parameter, "iterate composition supported for affine maps only");
    auto cells = base.cells(m, Interval{0.0, 1.0});
    MapModel map;
    map.gen_ = base.gen_;
    map.truncation_ = base.truncation_;
    map.iterate_ = m;
    int idx = 1;
    for (const auto& c : cells) {
        auto b = make_affine_branch(idx++, c.interval, c.slope, c.intercept);
        b.image = c.image;
        map.branches_.push_back(b);
    }
    map.finalize();
    return map;
}

const BranchSpec& MapModel::branch_at(double x) const {
    if (x == 0.0) throw Error(ErrorCode::zero_point, "x = 0 lies outside every branch");
    if (x < 0.0 || x > 1.0) throw Error(ErrorCode::bad_parameter, "point outside (0,1]");
    if (x <= coverage_left_)
        throw Error(ErrorCode::point_in_tail, "point below branch truncation");
    // binary search over (left, right] domains sorted by left endpoint
    std::size_t lo = 0, hi = branches_.size();
    while (lo + 1 < hi) {
        std::size_t mid = (lo + hi) / 2;
        if (branches_[mid].domain.lo < x)
            lo = mid;
        else
            hi = mid;
    }
    const BranchSpec& b = branches_[lo];
    if (!b.domain.contains(x)) throw Error(ErrorCode::point_in_tail, "point not covered");
    return b;
}

double MapModel::apply(double x) const { return branch_at(x).apply(x); }
double MapModel::derivative(double x) const { return branch_at(x).derivative_at(x); }

std::vector<Cell> MapModel::cells(int n, Interval window, std::size_t cap,
                                  double* tail_measure) const {
    if (n < 1) throw Error(ErrorCode::bad_parameter, "cells needs depth n >= 1");
    if (window.empty()) throw Error(ErrorCode::bad_parameter, "degenerate window");
    double lost = 0.0;
    std::vector<Cell> cur;
    {
        Cell root;
        root.interval = window;
        root.image = window;
        root.composite_affine = true;
        root.slope = 1.0;
        root.intercept = 0.0;
        cur.push_back(std::move(root));
    }
    for (int depth = 0; depth < n; ++depth) {
        std::vector<Cell> next;
        for (const auto& c : cur) {
            // refine by branches intersecting the current image
            if (c.image.lo < coverage_left_) {
                // part of the image below truncation is lost
                double cut = std::min(c.image.hi, coverage_left_);
                double frac = (cut - c.image.lo) / c.image.length();
                lost += frac * c.interval.length();
            }
            for (const auto& b : branches_) {
                Interval piece = c.image.intersect(b.domain);
                if (piece.empty() || piece.length() <= kPointTol * std::max(1e-30, piece.hi))
                    continue;
                Cell child;
                child.word = c.word;
                child.word.push_back(b.index);
                if (c.composite_affine && b.affine()) {
                    // pull the piece back to the original window
                    child.interval = Interval{(piece.lo - c.intercept) / c.slope,
                                              (piece.hi - c.intercept) / c.slope};
                    if (child.interval.lo > child.interval.hi)
                        std::swap(child.interval.lo, child.interval.hi);
                    const auto& a = b.affine_action();
                    child.composite_affine = true;
                    child.slope = a.slope * c.slope;
                    child.intercept = a.slope * c.intercept + a.intercept;
                    child.image = affine_image(piece, a.slope, a.intercept);
                    if (points_equal(piece.hi, b.domain.hi)) child.image.hi = std::min(child.image.hi, b.image.hi);
                    if (points_equal(piece.lo, b.domain.lo)) child.image.lo = std::max(child.image.lo, b.image.lo);
                    if (points_equal(piece.hi, b.domain.hi) && points_equal(piece.lo, b.domain.lo))
                        child.image = b.image;
                } else {
                    // general branches: endpoints by monotone forward maps,
                    // pulled back by bisection on the orbit composite
                    child.composite_affine = false;
                    double ia = b.apply(std::max(piece.lo, std::nextafter(piece.lo, piece.hi)));
                    double ib = b.apply(piece.hi);
                    if (ia > ib) std::swap(ia, ib);
                    child.image = Interval{ia, ib};
                    auto orbit = [&](double x) {
                        double y = x;
                        for (int j = 0; j < depth; ++j) y = branch_at(y).apply(y);
                        return y;
                    };
                    bool increasing = orbit(c.interval.lo + 1e-12 * c.interval.length()) <
                                      orbit(c.interval.hi);
                    auto pull = [&](double target) {
                        double lo = c.interval.lo, hi = c.interval.hi;
                        for (int it = 0; it < 80; ++it) {
                            double mid = 0.5 * (lo + hi);
                            double v = orbit(mid);
                            if ((v < target) == increasing)
                                lo = mid;
                            else
                                hi = mid;
                        }
                        return 0.5 * (lo + hi);
                    };
                    double flo = points_equal(piece.lo, c.image.lo)
                                     ? c.interval.lo
                                     : pull(increasing ? piece.lo : piece.hi);
                    double fhi = points_equal(piece.hi, c.image.hi)
                                     ? c.interval.hi
                                     : pull(increasing ? piece.hi : piece.lo);
                    if (flo > fhi) std::swap(flo, fhi);
                    child.interval = Interval{flo, fhi};
                }
                // pullback arithmetic can leave ulp-scale sliver cells at
                // branch boundaries; they carry no mass worth tracking
                if (child.interval.length() <=
                    1e-15 * std::max({1e-30, std::abs(child.interval.lo),
                                      std::abs(child.interval.hi)}))
                    continue;
                next.push_back(std::move(child));
                if (next.size() > cap)
                    throw Error(ErrorCode::cell_explosion, "cell count exceeds cap");
            }
        }
        cur = std::move(next);
    }
    if (tail_measure) *tail_measure = lost;
    return cur;
}

int MapModel::separation_time(double x, double y, int n_max) const {
    if (x == y) return kNotSeparated;
    double px = x, py = y;
    for (int n = 1; n <= n_max; ++n) {
        const BranchSpec& bx = branch_at(px);
        const BranchSpec& by = branch_at(py);
        if (bx.index != by.index) return n;
        px = bx.apply(px);
        py = by.apply(py);
    }
    return kNotSeparated;
}

std::vector<Cell> MapModel::image_components(Interval window, int n, std::size_t cap) const {
    return cells(n, window, cap);
}

} // namespace pexmap
