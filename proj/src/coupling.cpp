#include "pexmap/coupling.hpp"

#include <algorithm>
#include <cmath>

#include "pexmap/assumptions.hpp"
#include "pexmap/errors.hpp"

namespace pexmap {

CouplingConstants derive_constants(const MapModel& map, double q0, double delta0,
                                   Interval magnet, ConstantsMode mode,
                                   const DeriveOptions& opts) {
    H1Report h1 = estimate_theta0(map, q0, delta0);
    if (!h1.pass)
        throw Error(ErrorCode::h1_failure,
                    "one-step expansion fails: theta_hat = " + std::to_string(h1.theta_hat));

    CouplingConstants c;
    c.mode = mode;
    c.q0 = q0;
    c.delta0 = delta0;
    c.theta0 = h1.theta_hat;
    c.gamma = opts.gamma;
    c.c_j = estimate_log_jacobian_holder(map, opts.gamma);
    c.c_r = std::max(1.0, 2.0 * c.c_j / (1.0 / c.gamma - 1.0));
    c.c0 = std::max(1.0, 2.0 * c.theta0 * std::pow(delta0, -q0) / (1.0 - c.theta0));
    c.c_p = 10.0 * c.c0 * std::exp(7.0 * c.c_r);
    c.n_p = static_cast<int>(std::floor(-std::log(c.c_p) / std::log(c.theta0))) + 1;
    c.magnet = magnet;
    c.rho_bar_c = 0.5 * std::exp(-c.c_r);
    c.proof_covering_pieces = 3.0 * std::pow(2.0 * c.c_p, 1.0 / q0);

    // covering probes: k equal Lebesgue pairs, the practical stand-in for the
    // covering lemma's construction (its literal k is astronomically large)
    const int k = opts.probe_pieces;
    std::vector<Interval> probes;
    for (int i = 1; i <= k; ++i)
        probes.push_back(Interval{static_cast<double>(i - 1) / k, static_cast<double>(i) / k});
    H3Report h3 = check_h3(map, magnet, probes, opts.probe_horizon);
    if (!h3.pass)
        throw Error(ErrorCode::covering_ratio_zero,
                    "magnet not reached from every probe piece within the horizon");
    c.n_c = std::max(c.n_p, h3.n_c_candidate);

    double d_c = HUGE_VAL;
    for (const auto& w : probes) {
        StandardFamily g = StandardFamily::single(StandardPair::lebesgue(w));
        g = iterate_family(map, g, c.n_c);
        d_c = std::min(d_c, covering_ratio(g, magnet));
    }
    if (!(d_c > 0.0))
        throw Error(ErrorCode::covering_ratio_zero, "covering probe produced zero ratio");
    c.d_c = d_c;
    c.theta_c = std::exp(-c.c_r) * magnet.length() * c.d_c * c.rho_bar_c;
    c.n_coupling = 1 + c.n_p + c.n_c;
    return c;
}

namespace {

// cut only the pairs whose support contains the magnet, at its endpoints
StandardFamily cut_magnet_pairs(const StandardFamily& family, Interval magnet) {
    StandardFamily containing, rest;
    rest.add_dropped_mass(family.dropped_mass());
    for (const auto& e : family.entries()) {
        if (e.pair.support.contains(magnet))
            containing.entries().push_back(e);
        else
            rest.entries().push_back(e);
    }
    StandardFamily cut = cut_family(containing, {magnet.lo, magnet.hi});
    for (auto& e : cut.entries()) rest.entries().push_back(std::move(e));
    return rest;
}

} // namespace

CouplingLedger run_coupling(const MapModel& map, const StandardFamily& family,
                            const CouplingConstants& c, int rounds) {
    const Interval U = c.magnet;
    double z = z_value(family, c.q0);
    double w0 = family.total_weight();
    if (w0 > 0.0) z /= w0;
    if (z > c.c_p) {
        int np_g = static_cast<int>(std::floor(-std::log(z) / std::log(c.theta0))) + 1;
        throw Error(ErrorCode::family_not_proper,
                    "family not proper; pre-iterate n_p(G) = " + std::to_string(np_g) +
                        " steps first");
    }

    CouplingLedger ledger;
    // weights carry true mass throughout (no renormalization), so the
    // accounting identity is structural
    StandardFamily g = iterate_family(map, family, 1 + c.n_p);
    double cumulative = 0.0;
    for (int k = 1; k <= rounds; ++k) {
        g = iterate_family(map, g, c.n_c);
        StandardFamily gc = cut_magnet_pairs(g, U);
        double residual_before = gc.total_weight();
        double delta_abs = 0.0;
        for (const auto& e : gc.entries())
            if (e.pair.support.same_as(U)) delta_abs += e.weight;
        double delta_observed = residual_before > 0.0 ? delta_abs / residual_before : 0.0;
        if (!(delta_observed > 0.0))
            throw Error(ErrorCode::covering_ratio_zero,
                        "covering ratio vanished at round " + std::to_string(k) +
                            "; magnet unreachable or n_c too small");
        // the fixed schedule extracts exactly Theta_c per round; empirical
        // mode caps the ratio greedily when a round under-covers
        double rho = c.theta_c / delta_observed;
        if (rho > c.rho_bar_c) {
            if (c.mode == ConstantsMode::proof)
                throw Error(ErrorCode::bad_parameter,
                            "schedule premise failed at round " + std::to_string(k) +
                                ": Theta_c / delta exceeds rho_bar_c");
            rho = c.rho_bar_c;
        }

        // split in place: U-pairs give up a rho fraction of Lebesgue mass
        const double inv_len = 1.0 / U.length();
        PiecewiseDensity before_total = gc.total_density();
        double extracted = 0.0;
        double split_reg = 0.0;
        StandardFamily split;
        split.add_dropped_mass(gc.dropped_mass());
        for (const auto& e : gc.entries()) {
            if (!e.pair.support.same_as(U)) {
                split.entries().push_back(e);
                continue;
            }
            PiecewiseDensity d = e.pair.density;
            d.add_scaled(PiecewiseDensity::indicator(U, inv_len), -rho);
            if (d.min_value_on(U) < 0.0)
                throw Error(ErrorCode::bad_parameter,
                            "rho_bar exceeds the minimum density on a magnet pair");
            d = d.scaled(1.0 / (1.0 - rho));
            StandardPair p;
            p.support = U;
            p.density = std::move(d);
            split_reg = std::max(split_reg,
                                 regularity_seminorm(map, p, c.gamma, 10));
            split.entries().push_back(WeightedPair{std::move(p), (1.0 - rho) * e.weight});
            extracted += rho * e.weight;
        }

        // chunk shape check: reconstruct the extracted measure from the two
        // sides of the split identity and compare against extracted * m_U
        double defect = 0.0;
        {
            PiecewiseDensity after_total = split.total_density();
            PiecewiseDensity chunk = before_total;
            chunk.add_scaled(after_total, -1.0);
            double target = extracted * inv_len;
            defect = std::max(std::abs(chunk.max_value_on(U) - target),
                              std::abs(chunk.min_value_on(U) - target)) /
                     std::max(1.0, target);
            defect = std::max(defect, chunk.max_value_on(Interval{0.0, U.lo}));
            if (U.hi < 1.0) defect = std::max(defect, chunk.max_value_on(Interval{U.hi, 1.0}));
        }

        cumulative += extracted;
        g = iterate_family(map, split, 1 + c.n_p);

        CouplingRound row;
        row.round = k;
        row.time = k * c.n_coupling;
        row.coupled_mass = extracted;
        row.cumulative_coupled = cumulative;
        row.residual_mass = g.total_weight();
        double wsum = g.total_weight();
        row.residual_z = wsum > 0.0 ? z_value(g, c.q0) / wsum : 0.0;
        row.covering_ratio_observed = delta_observed;
        row.rho_used = rho;
        row.split_regularity = split_reg;
        row.chunk_uniformity_defect = defect;
        ledger.rounds.push_back(row);
        double ratio = residual_before > 0.0 ? extracted / residual_before : 0.0;
        ledger.min_extraction_ratio = std::min(ledger.min_extraction_ratio, ratio);
        ledger.dropped_mass = g.dropped_mass();
    }
    if (!ledger.rounds.empty()) {
        const auto& last = ledger.rounds.back();
        ledger.accounting_defect =
            std::abs(last.cumulative_coupled + last.residual_mass + ledger.dropped_mass - 1.0);
    }
    return ledger;
}

std::pair<double, double> fit_geometric_rate(const std::vector<double>& series, int n_lo,
                                             int n_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int n = n_lo; n <= n_hi && n < static_cast<int>(series.size()); ++n) {
        if (!(series[n] > 1e-300)) continue;
        double x = n, y = std::log(series[n]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) return {0.0, 0.0};
    double denom = m * sxx - sx * sx;
    double slope = (m * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / m;
    return {std::exp(slope), intercept};
}

TvSeries equidistribution_test(const MapModel& map, const StandardFamily& fam1,
                               const StandardFamily& fam2, int n_max) {
    TvSeries s;
    PiecewiseDensity d1 = fam1.total_density();
    PiecewiseDensity d2 = fam2.total_density();
    for (int n = 0; n <= n_max; ++n) {
        s.tv.push_back(tv_distance(d1, d2));
        if (n < n_max) {
            d1 = pushforward(map, d1, 1);
            d2 = pushforward(map, d2, 1);
        }
    }
    auto [rate, intercept] = fit_geometric_rate(s.tv, std::min(5, n_max / 2), n_max);
    s.fitted_rate = rate;
    s.fitted_log_intercept = intercept;
    return s;
}

TvSeries acip_convergence(const MapModel& map, const StandardFamily& family, int n_max,
                          const PiecewiseDensity& reference) {
    TvSeries s;
    PiecewiseDensity d = family.total_density();
    for (int n = 0; n <= n_max; ++n) {
        s.tv.push_back(tv_distance(d, reference));
        if (n < n_max) d = pushforward(map, d, 1);
    }
    auto [rate, intercept] = fit_geometric_rate(s.tv, std::min(5, n_max / 2), n_max);
    s.fitted_rate = rate;
    s.fitted_log_intercept = intercept;
    return s;
}

} // namespace pexmap
