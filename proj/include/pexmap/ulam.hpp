#ifndef PEXMAP_ULAM_HPP
#define PEXMAP_ULAM_HPP

#include <cstddef>
#include <vector>

#include "pexmap/density.hpp"
#include "pexmap/map_model.hpp"

namespace pexmap {

// Row-stochastic Ulam matrix over B uniform bins:
//   P(i,j) = m(bin_i cap T^{-1} bin_j) / m(bin_i),
// computed exactly for affine branches. Stored sparse, row-major.
struct UlamMatrix {
    int bins = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;
    // per-row covered fraction before normalization (short of 1 near the
    // truncation tail)
    std::vector<double> row_coverage;
};

UlamMatrix ulam_matrix(const MapModel& map, int bins);

struct StationaryResult {
    PiecewiseDensity density;
    int iterations = 0;
    double residual = 0.0;
};

// Left fixed point of the Ulam matrix by power iteration (L1 residual
// 1e-12, at most 1e5 sweeps), normalized to probability mass.
StationaryResult stationary_density(const UlamMatrix& matrix, double residual_tol = 1e-12,
                                    int max_iterations = 100000);

} // namespace pexmap

#endif
