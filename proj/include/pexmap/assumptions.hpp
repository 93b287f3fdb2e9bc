#ifndef PEXMAP_ASSUMPTIONS_HPP
#define PEXMAP_ASSUMPTIONS_HPP

#include <optional>
#include <vector>

#include "pexmap/interval.hpp"
#include "pexmap/map_model.hpp"

namespace pexmap {

struct OneStepSum {
    double value = 0.0;      // sum over truncated branches (+ exact analytic
                             // continuation when the generator admits one)
    double error_bar = 0.0;  // bound on the untruncated remainder
};

// Chernov's one-step expansion sum at q-scale over a window:
//   sum_{alpha in W/xi_1} (|W|/|T W_alpha|)^q (|W_alpha|/|W|)
OneStepSum one_step_sum(const MapModel& map, Interval window, double q);

struct WindowRecord {
    Interval window;
    double sum = 0.0;
    double error_bar = 0.0;
};

struct H1Report {
    double q = 0.0;
    double delta = 0.0;
    double theta_hat = 0.0;
    Interval worst_window;
    bool pass = false;  // theta_hat < 1 - 1e-6
    std::vector<WindowRecord> windows;
};

// Estimate theta_0 = sup_{|W|<delta} one_step_sum(W, q) by probing
// (a) windows straddling a single partition point, via the closed-form
//     maximizer over the split ratio (affine branches), and
// (b) tail windows (0, b_N] for every partition point b_N < delta.
H1Report estimate_theta0(const MapModel& map, double q, double delta);

// lambda^q (1-lambda) / (1 - lambda^{1-q}); the vSSV one-step tail value,
// < 1 for some q exactly when lambda < 1/2.
double vssv_h1_closed_form(double lambda, double q);

struct H3SeedRecord {
    Interval seed;
    int n_w = -1;  // least n with containment at every n..n_max; -1 = FAIL
};

struct H3Report {
    Interval magnet;
    int n_max = 0;
    std::vector<H3SeedRecord> seeds;
    int n_c_candidate = -1;  // max over seeds, -1 if any seed failed
    bool pass = false;
};

H3Report check_h3(const MapModel& map, Interval magnet, const std::vector<Interval>& seeds,
                  int n_max);

// Estimate of C_J = max over branches of |1_W log|T'||_{W,gamma_J}; exactly 0
// for piecewise-affine maps. A sampled lower bound for general branches.
double estimate_log_jacobian_holder(const MapModel& map, double gamma_j, int depth = 8,
                                    int samples_per_cell = 8);

} // namespace pexmap

#endif
