#ifndef PEXMAP_COUPLING_HPP
#define PEXMAP_COUPLING_HPP

#include <vector>

#include "pexmap/density.hpp"
#include "pexmap/interval.hpp"
#include "pexmap/map_model.hpp"
#include "pexmap/standard_family.hpp"

namespace pexmap {

enum class ConstantsMode { proof, empirical };

struct CouplingConstants {
    double q0 = 0.3;
    double delta0 = 0.1;
    double theta0 = 0.0;     // measured theta_hat in both modes
    double gamma = 0.5;
    double c_j = 0.0;        // log-Jacobian Holder constant
    double c_r = 1.0;        // max{1, 2 C_J/(gamma^{-1}-1)}
    double c0 = 0.0;         // max{1, 2 theta0 delta0^{-q0}/(1-theta0)}
    double c_p = 0.0;        // 10 c0 e^{7 C_r}
    int n_p = 0;             // floor(-log C_p / log theta0) + 1
    Interval magnet;
    int n_c = 0;
    double d_c = 0.0;
    double rho_bar_c = 0.0;  // 0.5 e^{-C_r} cap in empirical mode
    double theta_c = 0.0;    // e^{-C_r} |U| d_c rho_bar_c
    int n_coupling = 0;      // N_c = 1 + n_p + n_c
    ConstantsMode mode = ConstantsMode::empirical;
    // proof-mode diagnostic: the covering-lemma piece count (k/3)^{q0} >= 2C_p
    double proof_covering_pieces = 0.0;
};

struct DeriveOptions {
    double gamma = 0.5;
    int probe_pieces = 16;   // covering-ratio probe partition
    int probe_horizon = 64;  // n_max for the magnet search per probe piece
};

// Assemble the coupling constants for a magnet. theta0 is measured through
// estimate_theta0 (it is the definition); proof mode evaluates c0/C_p/n_p
// verbatim, empirical mode does the same from the measured theta_hat but
// keeps the practical covering probes for n_c and d_c.
CouplingConstants derive_constants(const MapModel& map, double q0, double delta0,
                                   Interval magnet, ConstantsMode mode,
                                   const DeriveOptions& opts = {});

struct CouplingRound {
    int round = 0;
    int time = 0;                 // k * N_c
    double coupled_mass = 0.0;    // extracted this round
    double cumulative_coupled = 0.0;
    double residual_mass = 0.0;
    double residual_z = 0.0;
    double covering_ratio_observed = 0.0;  // delta(G') after cutting
    double rho_used = 0.0;
    double split_regularity = 0.0;         // re-checked seminorm of split pairs
    double chunk_uniformity_defect = 0.0;  // sup-deviation of the chunk from m_U
};

struct CouplingLedger {
    std::vector<CouplingRound> rounds;
    double dropped_mass = 0.0;
    double min_extraction_ratio = 1.0;  // measured Theta_hat
    // mass-accounting defect |cumulative + residual - 1| at the final round
    double accounting_defect = 0.0;
};

// The coupling algorithm: per round iterate n_c steps, cut pairs containing
// the magnet at its endpoints, split off a Lebesgue chunk, then iterate
// 1 + n_p steps to restore properness.
CouplingLedger run_coupling(const MapModel& map, const StandardFamily& family,
                            const CouplingConstants& constants, int rounds);

struct TvSeries {
    std::vector<double> tv;   // index n = 0..n_max
    double fitted_rate = 0.0;
    double fitted_log_intercept = 0.0;
};

// exact TV distance between pushforwards of the two total measures
TvSeries equidistribution_test(const MapModel& map, const StandardFamily& fam1,
                               const StandardFamily& fam2, int n_max);

// TV(T^n nu_G, reference) with a log-linear fit; reference is the closed
// form or an Ulam stationary density
TvSeries acip_convergence(const MapModel& map, const StandardFamily& family, int n_max,
                          const PiecewiseDensity& reference);

// least-squares log-linear fit of a positive series over n in [n_lo, n_hi]
std::pair<double, double> fit_geometric_rate(const std::vector<double>& series, int n_lo,
                                             int n_hi);

} // namespace pexmap

#endif
