#include "pexmap/assumptions.hpp"

#include <algorithm>
#include <cmath>

#include "pexmap/errors.hpp"

namespace pexmap {

namespace {

// exact or bounding continuation of sum_{k > K} a_k^{1-q} Lambda_k^{-q}
// for the countable generator families; pair (value, is_exact)
std::pair<double, bool> untruncated_tail(const MapModel& map, double q) {
    const auto& g = map.generator();
    const int K = map.truncation();
    if (g.family == Family::vssv) {
        double l = g.lambda;
        // sum_{k>K} [l^{k-1}(1-l)]^{1-q} [l(1-l)]^{q}
        double ratio = std::pow(l, 1.0 - q);
        double first = std::pow(l, (1.0 - q) * K) * std::pow(1.0 - l, 1.0 - q) *
                       std::pow(l * (1.0 - l), q);
        return {first / (1.0 - ratio), true};
    }
    if (g.family == Family::geometric_tail) {
        double r = g.tail_ratio;
        double ratio = std::pow(r, 1.0 - q);
        if (g.lambda_rule.kind == LambdaRule::Kind::constant) {
            double lam = g.lambda_rule.value;
            double first = std::pow((1.0 - r) * std::pow(r, K), 1.0 - q) * std::pow(lam, -q);
            return {first / (1.0 - ratio), true};
        }
        // Lambda_k = k: bound k^{-q} by (K+1)^{-q}
        double first = std::pow((1.0 - r) * std::pow(r, K), 1.0 - q) *
                       std::pow(static_cast<double>(K + 1), -q);
        return {first / (1.0 - ratio), false};
    }
    return {0.0, true};  // finite families have no tail
}

} // namespace

OneStepSum one_step_sum(const MapModel& map, Interval window, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::bad_parameter, "q must lie in (0,1]");
    if (window.empty()) throw Error(ErrorCode::bad_parameter, "degenerate window");
    const double len = window.length();
    OneStepSum r;
    auto cells = map.cells(1, window);
    for (const auto& c : cells) {
        double piece = c.interval.length();
        double image = c.image.length();
        if (piece <= 0.0 || image <= 0.0) continue;
        r.value += std::pow(len / image, q) * (piece / len);
    }
    if (window.lo < map.coverage_left() - kPointTol * map.coverage_left() ||
        (window.lo <= 0.0 && map.coverage_left() > 0.0)) {
        auto [tail, exact] = untruncated_tail(map, q);
        double contribution = tail * std::pow(len, q - 1.0);
        if (exact)
            r.value += contribution;
        else
            r.error_bar += contribution;
    }
    if (r.error_bar > 0.1 * std::max(r.value, 1e-300))
        throw Error(ErrorCode::tail_dominates, "untruncated tail dominates the one-step sum");
    return r;
}

namespace {

// max over t in (0,1) of L^-q t^{1-q} + R^-q (1-t)^{1-q}, attained at
// t* = R/(L+R)
double straddle_value(double slope_l, double slope_r, double q) {
    double L = std::abs(slope_l), R = std::abs(slope_r);
    double t = R / (L + R);
    return std::pow(L, -q) * std::pow(t, 1.0 - q) + std::pow(R, -q) * std::pow(1.0 - t, 1.0 - q);
}

} // namespace

H1Report estimate_theta0(const MapModel& map, double q, double delta) {
    if (!(delta > 0.0 && delta <= 1.0)) throw Error(ErrorCode::bad_parameter, "delta in (0,1]");
    H1Report rep;
    rep.q = q;
    rep.delta = delta;

    const auto& br = map.branches();

    // (a) windows straddling one partition point
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        const auto& L = br[i];
        const auto& R = br[i + 1];
        double p = L.domain.hi;
        WindowRecord w;
        if (L.affine() && R.affine()) {
            double sl = L.affine_action().slope, sr = R.affine_action().slope;
            double t = std::abs(sr) / (std::abs(sl) + std::abs(sr));
            double width = 0.5 * std::min({delta, L.domain.length() / std::max(t, 1e-12),
                                           R.domain.length() / std::max(1.0 - t, 1e-12)});
            w.window = Interval{p - t * width, p + (1.0 - t) * width};
            w.sum = straddle_value(sl, sr, q);
        } else {
            // numeric probe for general branches
            double width = 0.9 * std::min({delta, 2.0 * L.domain.length(),
                                           2.0 * R.domain.length()});
            double best = 0.0;
            Interval bestw{p - 0.5 * width, p + 0.5 * width};
            for (int ti = 1; ti < 16; ++ti) {
                double t = ti / 16.0;
                double wl = std::min(t * width, L.domain.length() * 0.999);
                double wr = std::min((1.0 - t) * width, R.domain.length() * 0.999);
                Interval cand{p - wl, p + wr};
                auto s = one_step_sum(map, cand, q);
                if (s.value > best) {
                    best = s.value;
                    bestw = cand;
                }
            }
            w.window = bestw;
            w.sum = best;
        }
        rep.windows.push_back(w);
    }

    // (b) tail windows (0, b_N] for partition points below delta
    if (map.coverage_left() > 0.0) {
        for (const auto& b : br) {
            double bn = b.domain.lo;
            if (bn <= 0.0 || bn >= delta) continue;
            WindowRecord w;
            w.window = Interval{0.0, bn};
            auto s = one_step_sum(map, w.window, q);
            w.sum = s.value;
            w.error_bar = s.error_bar;
            rep.windows.push_back(w);
        }
    }

    for (const auto& w : rep.windows) {
        if (w.sum + w.error_bar > rep.theta_hat) {
            rep.theta_hat = w.sum + w.error_bar;
            rep.worst_window = w.window;
        }
    }
    rep.pass = rep.theta_hat < 1.0 - 1e-6;
    return rep;
}

double vssv_h1_closed_form(double lambda, double q) {
    if (!(lambda > 0.0 && lambda < 1.0)) throw Error(ErrorCode::bad_parameter, "lambda in (0,1)");
    if (!(q > 0.0 && q <= 1.0)) throw Error(ErrorCode::bad_parameter, "q in (0,1]");
    double denom = 1.0 - std::pow(lambda, 1.0 - q);
    if (denom == 0.0) throw Error(ErrorCode::bad_parameter, "lambda^{1-q} = 1");
    return std::pow(lambda, q) * (1.0 - lambda) / denom;
}

namespace {

// drop intervals contained in another one; containment queries against the
// remaining maximal set are unchanged
std::vector<Interval> prune_maximal(std::vector<Interval> v) {
    std::sort(v.begin(), v.end(), [](const Interval& a, const Interval& b) {
        if (a.lo != b.lo) return a.lo < b.lo;
        return a.hi > b.hi;
    });
    std::vector<Interval> out;
    double best_hi = -1.0;
    for (const auto& c : v) {
        if (c.hi > best_hi + kPointTol * std::max(1.0, c.hi)) {
            out.push_back(c);
            best_hi = c.hi;
        }
    }
    return out;
}

} // namespace

H3Report check_h3(const MapModel& map, Interval magnet, const std::vector<Interval>& seeds,
                  int n_max) {
    if (magnet.empty() || magnet.lo < 0.0 || magnet.hi > 1.0)
        throw Error(ErrorCode::bad_parameter, "magnet must be a subinterval of (0,1]");
    H3Report rep;
    rep.magnet = magnet;
    rep.n_max = n_max;
    rep.pass = true;
    int worst = 0;
    for (const auto& seed : seeds) {
        std::vector<Interval> comps{seed};
        std::vector<bool> contains(n_max + 1, false);
        for (int n = 1; n <= n_max; ++n) {
            std::vector<Interval> next;
            for (const auto& c : comps) {
                for (const auto& b : map.branches()) {
                    Interval piece = c.intersect(b.domain);
                    if (piece.empty() || piece.length() <= 1e-15) continue;
                    double y1 = b.apply(std::max(piece.lo, std::nextafter(piece.lo, piece.hi)));
                    double y2 = b.apply(piece.hi);
                    if (y1 > y2) std::swap(y1, y2);
                    if (points_equal(piece.lo, b.domain.lo))
                        y1 = (b.affine() && b.affine_action().slope > 0) ? b.image.lo : y1;
                    if (points_equal(piece.hi, b.domain.hi))
                        y2 = (b.affine() && b.affine_action().slope > 0) ? b.image.hi : y2;
                    next.push_back(Interval{y1, y2});
                }
            }
            comps = prune_maximal(std::move(next));
            if (comps.size() > 100000)
                throw Error(ErrorCode::cell_explosion, "component count exploded in check_h3");
            for (const auto& c : comps)
                if (c.contains(magnet)) {
                    contains[n] = true;
                    break;
                }
        }
        H3SeedRecord rec;
        rec.seed = seed;
        rec.n_w = -1;
        for (int n = n_max; n >= 1; --n) {
            if (!contains[n]) break;
            rec.n_w = n;
        }
        rep.seeds.push_back(rec);
        if (rec.n_w < 0)
            rep.pass = false;
        else
            worst = std::max(worst, rec.n_w);
    }
    rep.n_c_candidate = rep.pass ? worst : -1;
    return rep;
}

double estimate_log_jacobian_holder(const MapModel& map, double gamma_j, int depth,
                                    int samples_per_cell) {
    if (!(gamma_j > 0.0 && gamma_j < 1.0))
        throw Error(ErrorCode::bad_parameter, "gamma_J in (0,1)");
    if (map.piecewise_affine()) return 0.0;
    double best = 0.0;
    for (const auto& b : map.branches()) {
        if (b.affine()) continue;
        // pairs inside one branch share xi_1, so s >= 2; points in distinct
        // depth-n children of a shared depth-(n-1) cell separate exactly at n
        for (int n = 2; n <= depth; ++n) {
            std::vector<Cell> cells;
            try {
                cells = map.cells(n, b.domain, 100000);
            } catch (const Error&) {
                break;
            }
            const double gpow = std::pow(gamma_j, n);
            std::size_t i = 0;
            while (i < cells.size()) {
                std::size_t j = i;
                while (j < cells.size() &&
                       std::equal(cells[i].word.begin(), cells[i].word.end() - 1,
                                  cells[j].word.begin()))
                    ++j;
                if (j - i >= 2) {
                    // sampled sup/inf of log|T'| per child, osc across
                    // distinct children
                    double s1 = -HUGE_VAL, s2 = -HUGE_VAL, i1 = HUGE_VAL, i2 = HUGE_VAL;
                    std::size_t s1c = 0, i1c = 0;
                    for (std::size_t c = i; c < j; ++c) {
                        if (cells[c].interval.length() <= 1e-15) continue;
                        double lo = HUGE_VAL, hi = -HUGE_VAL;
                        for (int s = 0; s <= samples_per_cell; ++s) {
                            double x = cells[c].interval.lo +
                                       cells[c].interval.length() * s / samples_per_cell;
                            if (s == 0) x = std::nextafter(x, 1.0);
                            double t = std::log(std::abs(b.derivative_at(x)));
                            lo = std::min(lo, t);
                            hi = std::max(hi, t);
                        }
                        if (hi > s1) {
                            s2 = s1;
                            s1 = hi;
                            s1c = c;
                        } else if (hi > s2) {
                            s2 = hi;
                        }
                        if (lo < i1) {
                            i2 = i1;
                            i1 = lo;
                            i1c = c;
                        } else if (lo < i2) {
                            i2 = lo;
                        }
                    }
                    double osc = (s1c != i1c) ? s1 - i1 : std::max(s1 - i2, s2 - i1);
                    if (osc > 0.0 && std::isfinite(osc)) best = std::max(best, osc / gpow);
                }
                i = j;
            }
        }
    }
    return best;
}

} // namespace pexmap
