#include "pexmap/standard_family.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pexmap/coupling.hpp"
#include "pexmap/errors.hpp"

namespace pexmap {

StandardPair StandardPair::lebesgue(Interval support) {
    if (support.empty()) throw Error(ErrorCode::bad_parameter, "empty support");
    StandardPair p;
    p.support = support;
    p.density = PiecewiseDensity::indicator(support, 1.0 / support.length());
    p.regularity = 0.0;
    return p;
}

StandardPair StandardPair::with_density(Interval support, PiecewiseDensity density) {
    StandardPair p;
    p.support = support;
    double m = density.integral(support);
    if (!(m > 0.0)) throw Error(ErrorCode::zero_density, "pair density has no mass");
    if (std::abs(m - 1.0) > 1e-9) density = density.scaled(1.0 / m);
    p.density = std::move(density);
    return p;
}

StandardFamily StandardFamily::single(StandardPair pair, double weight) {
    StandardFamily f;
    f.entries_.push_back(WeightedPair{std::move(pair), weight});
    return f;
}

double StandardFamily::total_weight() const {
    double s = 0.0;
    for (const auto& e : entries_) s += e.weight;
    return s;
}

PiecewiseDensity StandardFamily::total_density() const {
    PiecewiseDensity total;
    for (const auto& e : entries_) total.add_scaled(e.pair.density, e.weight);
    return total;
}

namespace {

struct SupportKey {
    double lo, hi;
    bool operator<(const SupportKey& o) const {
        if (!points_equal(lo, o.lo)) return lo < o.lo;
        if (!points_equal(hi, o.hi)) return hi < o.hi;
        return false;
    }
};

} // namespace

void StandardFamily::merge_identical_supports() {
    std::map<SupportKey, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < entries_.size(); ++i)
        groups[SupportKey{entries_[i].pair.support.lo, entries_[i].pair.support.hi}].push_back(i);
    if (groups.size() == entries_.size()) return;
    std::vector<WeightedPair> merged;
    merged.reserve(groups.size());
    for (auto& [key, idxs] : groups) {
        if (idxs.size() == 1) {
            merged.push_back(std::move(entries_[idxs[0]]));
            continue;
        }
        double wsum = 0.0;
        for (auto i : idxs) wsum += entries_[i].weight;
        // normalized constant densities on one support are all 1/|W|; the
        // mergence is then weight addition alone
        bool all_flat = true;
        for (auto i : idxs) {
            const auto& p = entries_[i].pair;
            double lo = p.density.min_value_on(p.support);
            double hi = p.density.max_value_on(p.support);
            if (hi - lo > 1e-14 * std::max(1.0, hi)) {
                all_flat = false;
                break;
            }
        }
        if (all_flat) {
            WeightedPair keep = std::move(entries_[idxs[0]]);
            keep.weight = wsum;
            merged.push_back(std::move(keep));
            continue;
        }
        PiecewiseDensity mix;
        for (auto i : idxs)
            mix.add_scaled(entries_[i].pair.density, wsum > 0 ? entries_[i].weight / wsum : 0.0);
        StandardPair p;
        p.support = entries_[idxs[0]].pair.support;
        p.density = std::move(mix);
        merged.push_back(WeightedPair{std::move(p), wsum});
    }
    std::sort(merged.begin(), merged.end(), [](const WeightedPair& a, const WeightedPair& b) {
        return a.pair.support.lo < b.pair.support.lo;
    });
    entries_ = std::move(merged);
}

void StandardFamily::apply_weight_floor(double floor) {
    std::vector<WeightedPair> kept;
    kept.reserve(entries_.size());
    for (auto& e : entries_) {
        if (e.weight < floor)
            dropped_mass_ += e.weight;
        else
            kept.push_back(std::move(e));
    }
    entries_ = std::move(kept);
}

double z_value(const StandardFamily& family, double q0) {
    if (!(q0 > 0.0 && q0 <= 1.0)) throw Error(ErrorCode::bad_parameter, "q0 in (0,1]");
    double z = 0.0;
    for (const auto& e : family.entries()) {
        double len = e.pair.support.length();
        if (e.weight <= 0.0) continue;
        if (len <= 0.0) return HUGE_VAL;
        z += e.weight * std::pow(len, -q0);
    }
    return z;
}

double regularity_seminorm(const MapModel& map, const StandardPair& pair, double gamma,
                           int depth) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw Error(ErrorCode::bad_parameter, "gamma in (0,1)");
    const auto& d = pair.density;
    double dmin = d.min_value_on(pair.support);
    if (dmin <= 0.0)
        throw Error(ErrorCode::zero_density, "regularity needs a strictly positive density");
    if (d.max_value_on(pair.support) - dmin <= 1e-15 * dmin) {
        pair.regularity = 0.0;
        return 0.0;
    }

    double best = 0.0;
    for (int n = 1; n <= depth; ++n) {
        std::vector<Cell> cells;
        try {
            cells = map.cells(n, pair.support, 200000);
        } catch (const Error&) {
            break;
        }
        // points in distinct depth-n children of a shared depth-(n-1) cell
        // separate exactly at time n; group children by word prefix
        bool all_flat = true;
        std::size_t i = 0;
        const double gpow = std::pow(gamma, n);
        while (i < cells.size()) {
            std::size_t j = i;
            while (j < cells.size() &&
                   std::equal(cells[i].word.begin(), cells[i].word.end() - 1,
                              cells[j].word.begin()))
                ++j;
            // group [i, j): track the two largest sups and two smallest infs
            double s1 = -HUGE_VAL, s2 = -HUGE_VAL, i1 = HUGE_VAL, i2 = HUGE_VAL;
            std::size_t s1c = 0, i1c = 0;
            for (std::size_t c = i; c < j; ++c) {
                double hi = std::log(d.max_value_on(cells[c].interval));
                double lo = std::log(d.min_value_on(cells[c].interval));
                if (hi - lo > 1e-15) all_flat = false;
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
            if (j - i >= 2) {
                double osc;
                if (s1c != i1c)
                    osc = s1 - i1;
                else
                    osc = std::max(s1 - i2, s2 - i1);
                if (osc > 0.0) best = std::max(best, osc / gpow);
            }
            i = j;
        }
        // constant density on every depth-n cell: deeper levels contribute 0
        if (all_flat) break;
    }
    pair.regularity = best;
    return best;
}

StandardFamily iterate_family(const MapModel& map, const StandardFamily& family, int n,
                              const IterateOptions& opts) {
    // one-step cells recur on the same handful of supports; memoize them for
    // the duration of this call
    std::map<SupportKey, std::vector<Cell>> cell_memo;
    auto cells_of = [&](const Interval& support) -> const std::vector<Cell>& {
        auto [it, fresh] = cell_memo.try_emplace(SupportKey{support.lo, support.hi});
        if (fresh) it->second = map.cells(1, support, opts.pair_cap);
        return it->second;
    };

    // Lebesgue children dominate; pool their weights per support and
    // materialize one density per distinct support
    std::map<SupportKey, PiecewiseDensity> lebesgue_memo;
    auto lebesgue_density = [&](const Interval& support) {
        auto [it, fresh] = lebesgue_memo.try_emplace(SupportKey{support.lo, support.hi});
        if (fresh) it->second = PiecewiseDensity::indicator(support, 1.0 / support.length());
        return it->second;
    };

    StandardFamily cur = family;
    for (int step = 0; step < n; ++step) {
        StandardFamily next;
        next.add_dropped_mass(cur.dropped_mass());
        std::map<SupportKey, std::pair<Interval, double>> flat;
        for (const auto& e : cur.entries()) {
            if (e.weight <= 0.0) continue;
            const auto& cells = cells_of(e.pair.support);
            double covered_weight = 0.0;
            for (const auto& c : cells) {
                double cell_mass = e.pair.density.integral(c.interval);
                if (cell_mass <= 0.0) continue;
                covered_weight += cell_mass;
                if (!c.composite_affine)
                    throw Error(ErrorCode::bad_parameter,
                                "iterate_family requires affine branches");
                bool interior_bp = false;
                for (double p : e.pair.density.breakpoints())
                    if (p > c.interval.lo && p < c.interval.hi) {
                        interior_bp = true;
                        break;
                    }
                if (!interior_bp) {
                    // constant on the cell: the child is Lebesgue on the image
                    auto it = flat.try_emplace(SupportKey{c.image.lo, c.image.hi},
                                               std::pair<Interval, double>{c.image, 0.0})
                                  .first;
                    it->second.second += e.weight * cell_mass;
                    continue;
                }
                // push the conditional density through the branch piece
                double inv_slope = 1.0 / std::abs(c.slope);
                StandardPair child;
                child.support = c.image;
                std::vector<double> bp{0.0, c.image.lo, c.image.hi, 1.0};
                for (double p : e.pair.density.breakpoints()) {
                    if (p > c.interval.lo && p < c.interval.hi) {
                        double y = c.slope * p + c.intercept;
                        if (y > c.image.lo && y < c.image.hi) bp.push_back(y);
                    }
                }
                std::sort(bp.begin(), bp.end());
                std::vector<double> dd;
                for (double p : bp)
                    if (dd.empty() || !points_equal(dd.back(), p)) dd.push_back(p);
                if (dd.front() > 0.0) dd.insert(dd.begin(), 0.0);
                dd.front() = 0.0;
                if (dd.back() < 1.0) dd.push_back(1.0);
                dd.back() = 1.0;
                std::vector<double> vals(dd.size() - 1, 0.0);
                for (std::size_t i = 0; i + 1 < dd.size(); ++i) {
                    double mid = 0.5 * (dd[i] + dd[i + 1]);
                    if (mid <= c.image.lo || mid > c.image.hi) continue;
                    double x = (mid - c.intercept) / c.slope;
                    vals[i] = e.pair.density.value_at(x) * inv_slope / cell_mass;
                }
                child.density =
                    PiecewiseDensity::from_breakpoints(std::move(dd), std::move(vals));
                next.entries().push_back(WeightedPair{std::move(child), e.weight * cell_mass});
            }
            // weight not covered by any truncated branch
            if (covered_weight < 1.0) next.add_dropped_mass(e.weight * (1.0 - covered_weight));
            if (next.entries().size() + flat.size() > opts.pair_cap)
                throw Error(ErrorCode::cell_explosion, "pair count exceeded cap");
        }
        for (const auto& [key, entry] : flat) {
            StandardPair p;
            p.support = entry.first;
            p.density = lebesgue_density(entry.first);
            p.regularity = 0.0;
            next.entries().push_back(WeightedPair{std::move(p), entry.second});
        }
        next.merge_identical_supports();
        next.apply_weight_floor(opts.weight_floor);
        cur = std::move(next);
    }
    return cur;
}

StandardFamily cut_family(const StandardFamily& family, const std::vector<double>& points) {
    StandardFamily out;
    out.add_dropped_mass(family.dropped_mass());
    for (const auto& e : family.entries()) {
        std::vector<double> inner;
        for (double p : points)
            if (e.pair.support.contains(p) && !points_equal(p, e.pair.support.lo) &&
                !points_equal(p, e.pair.support.hi))
                inner.push_back(p);
        if (inner.empty()) {
            out.entries().push_back(e);
            continue;
        }
        std::sort(inner.begin(), inner.end());
        std::vector<double> cuts{e.pair.support.lo};
        for (double p : inner)
            if (!points_equal(cuts.back(), p)) cuts.push_back(p);
        cuts.push_back(e.pair.support.hi);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            Interval piece{cuts[i], cuts[i + 1]};
            double pm = e.pair.density.integral(piece);
            if (pm <= 0.0) continue;
            StandardPair sub;
            sub.support = piece;
            sub.density = e.pair.density.restrict_normalized(piece);
            out.entries().push_back(WeightedPair{std::move(sub), e.weight * pm});
        }
    }
    return out;
}

StandardFamily merge_pairs(const StandardFamily& family, Interval support) {
    double wsum = 0.0;
    for (const auto& e : family.entries())
        if (e.pair.support.same_as(support)) wsum += e.weight;
    if (wsum == 0.0) throw Error(ErrorCode::support_mismatch, "no pair on the given support");
    StandardFamily out;
    out.add_dropped_mass(family.dropped_mass());
    PiecewiseDensity mix;
    for (const auto& e : family.entries()) {
        if (e.pair.support.same_as(support))
            mix.add_scaled(e.pair.density, e.weight / wsum);
        else
            out.entries().push_back(e);
    }
    StandardPair merged;
    merged.support = support;
    merged.density = std::move(mix);
    out.entries().push_back(WeightedPair{std::move(merged), wsum});
    return out;
}

double covering_ratio(const StandardFamily& family, Interval magnet) {
    double s = 0.0;
    for (const auto& e : family.entries())
        if (e.pair.support.contains(magnet)) s += e.weight;
    return s;
}

SplitResult split_over_magnet(const StandardFamily& family, Interval magnet, double rho_bar) {
    if (!(rho_bar > 0.0 && rho_bar < 1.0))
        throw Error(ErrorCode::bad_parameter, "rho_bar out of range");
    double delta_bar = 0.0;
    for (const auto& e : family.entries())
        if (e.pair.support.same_as(magnet)) delta_bar += e.weight;

    SplitResult r;
    r.lebesgue_weight = rho_bar * delta_bar;
    if (delta_bar == 0.0) {
        r.split_part = family;
        return r;
    }
    r.lebesgue_part = StandardFamily::single(StandardPair::lebesgue(magnet), 1.0);

    const double keep = 1.0 - r.lebesgue_weight;
    StandardFamily split;
    split.add_dropped_mass(family.dropped_mass());
    const double inv_len = 1.0 / magnet.length();
    for (const auto& e : family.entries()) {
        if (e.pair.support.same_as(magnet)) {
            // density (rho_alpha - rho_bar/|U|) / (1 - rho_bar)
            PiecewiseDensity d = e.pair.density;
            d.add_scaled(PiecewiseDensity::indicator(magnet, inv_len), -rho_bar);
            d = d.scaled(1.0 / (1.0 - rho_bar));
            if (d.min_value_on(magnet) < 0.0)
                throw Error(ErrorCode::bad_parameter,
                            "rho_bar exceeds the minimum density on a magnet pair");
            StandardPair p;
            p.support = e.pair.support;
            p.density = std::move(d);
            split.entries().push_back(
                WeightedPair{std::move(p), (1.0 - rho_bar) * e.weight / keep});
        } else {
            split.entries().push_back(WeightedPair{e.pair, e.weight / keep});
        }
    }
    r.split_part = std::move(split);
    return r;
}

GrowthReport growth_report(const MapModel& map, const StandardFamily& family, int n_max,
                           const CouplingConstants& c) {
    double z0 = z_value(family, c.q0);
    if (!std::isfinite(z0))
        throw Error(ErrorCode::bad_parameter, "family outside F (Z is infinite)");
    GrowthReport rep;
    const double e2cr = std::exp(2.0 * c.c_r);
    bool single_lebesgue = family.entries().size() == 1;
    if (single_lebesgue) {
        const auto& p = family.entries()[0].pair;
        single_lebesgue =
            std::abs(p.density.max_value_on(p.support) - p.density.min_value_on(p.support)) <
            1e-12 / p.support.length();
    }
    StandardFamily cur = family;
    double theta_pow = 1.0;
    double geom_sum = 0.0;
    for (int n = 1; n <= n_max; ++n) {
        cur = iterate_family(map, cur, 1);
        theta_pow *= c.theta0;
        geom_sum += theta_pow;
        GrowthStep s;
        s.n = n;
        s.z = z_value(cur, c.q0);
        s.bound = e2cr * (z0 * theta_pow + c.c0);
        if (single_lebesgue)
            s.lebesgue_bound = theta_pow * z0 + 2.0 * std::pow(c.delta0, -c.q0) * geom_sum;
        s.slack = s.bound - s.z;
        if (s.slack < 0.0) rep.all_within_bound = false;
        if (rep.properness_step < 0 && s.z <= c.c_p) rep.properness_step = n;
        rep.steps.push_back(s);
    }
    return rep;
}

} // namespace pexmap
