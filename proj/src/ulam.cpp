#include "pexmap/ulam.hpp"

#include <algorithm>
#include <cmath>

#include "pexmap/errors.hpp"

namespace pexmap {

UlamMatrix ulam_matrix(const MapModel& map, int bins) {
    if (bins < 2) throw Error(ErrorCode::bad_parameter, "ulam needs at least 2 bins");
    UlamMatrix M;
    M.bins = bins;
    M.rows.assign(bins, {});
    M.row_coverage.assign(bins, 0.0);
    const double w = 1.0 / bins;

    for (const auto& b : map.branches()) {
        if (!b.affine())
            throw Error(ErrorCode::bad_parameter, "ulam matrix requires an affine map");
        const auto& a = b.affine_action();
        int i0 = std::max(0, static_cast<int>(std::floor(b.domain.lo * bins)));
        int i1 = std::min(bins, static_cast<int>(std::ceil(b.domain.hi * bins)));
        for (int i = i0; i < i1; ++i) {
            double xl = std::max(b.domain.lo, i * w);
            double xr = std::min(b.domain.hi, (i + 1) * w);
            if (xr <= xl) continue;
            double y1 = a.slope * xl + a.intercept;
            double y2 = a.slope * xr + a.intercept;
            if (y1 > y2) std::swap(y1, y2);
            y1 = std::max(y1, b.image.lo);
            y2 = std::min(y2, b.image.hi);
            int j0 = std::max(0, static_cast<int>(std::floor(y1 * bins)));
            int j1 = std::min(bins, static_cast<int>(std::ceil(y2 * bins)));
            double inv_slope = 1.0 / std::abs(a.slope);
            for (int j = j0; j < j1; ++j) {
                double zl = std::max(y1, j * w);
                double zr = std::min(y2, (j + 1) * w);
                if (zr <= zl) continue;
                M.rows[i].emplace_back(j, (zr - zl) * inv_slope / w);
            }
        }
    }

    // consolidate duplicate column entries and normalize rows
    for (int i = 0; i < bins; ++i) {
        auto& row = M.rows[i];
        std::sort(row.begin(), row.end());
        std::vector<std::pair<int, double>> merged;
        for (const auto& [j, v] : row) {
            if (!merged.empty() && merged.back().first == j)
                merged.back().second += v;
            else
                merged.emplace_back(j, v);
        }
        double sum = 0.0;
        for (const auto& [j, v] : merged) sum += v;
        M.row_coverage[i] = sum;
        if (sum > 0.0)
            for (auto& [j, v] : merged) v /= sum;
        row = std::move(merged);
    }
    return M;
}

StationaryResult stationary_density(const UlamMatrix& M, double residual_tol,
                                    int max_iterations) {
    const int B = M.bins;
    std::vector<double> pi(B, 1.0 / B), next(B);
    double resid = HUGE_VAL;
    int it = 0;
    for (; it < max_iterations; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (int i = 0; i < B; ++i) {
            double p = pi[i];
            if (p == 0.0) continue;
            for (const auto& [j, v] : M.rows[i]) next[j] += p * v;
        }
        double total = 0.0;
        for (double v : next) total += v;
        if (total <= 0.0) throw Error(ErrorCode::non_convergence, "mass vanished in power iteration");
        for (double& v : next) v /= total;
        resid = 0.0;
        for (int i = 0; i < B; ++i) resid += std::abs(next[i] - pi[i]);
        pi.swap(next);
        if (resid < residual_tol) break;
    }
    if (resid >= residual_tol)
        throw Error(ErrorCode::non_convergence,
                    "power iteration residual " + std::to_string(resid) + " after " +
                        std::to_string(max_iterations) + " sweeps");

    std::vector<double> bp(B + 1), val(B);
    for (int i = 0; i <= B; ++i) bp[i] = static_cast<double>(i) / B;
    for (int i = 0; i < B; ++i) val[i] = pi[i] * B;
    StationaryResult r;
    r.density = PiecewiseDensity::from_breakpoints(std::move(bp), std::move(val));
    r.iterations = it + 1;
    r.residual = resid;
    return r;
}

} // namespace pexmap
