// Test-side oracles, independent of the library implementation paths they
// check. Everything here is a direct summation, enumeration, or quadrature.
#ifndef PEXMAP_TESTS_ORACLES_HPP
#define PEXMAP_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <vector>

namespace oracles {

// sum_{k=N+1}^{K} a_k^{1-q} Lambda_k^{-q} / b_N^{1-q} for the vSSV family
// (a_k = l^{k-1}(1-l), Lambda_1 = 1/(1-l), Lambda_k = 1/(l(1-l)))
inline double vssv_one_step_tail(double lambda, double q, int N, int K) {
    double s = 0.0;
    for (int k = N + 1; k <= K; ++k) {
        double a = std::pow(lambda, k - 1) * (1.0 - lambda);
        double slope = (k == 1) ? 1.0 / (1.0 - lambda) : 1.0 / (lambda * (1.0 - lambda));
        s += std::pow(a, 1.0 - q) * std::pow(slope, -q);
    }
    return s / std::pow(std::pow(lambda, N), 1.0 - q);
}

// branch mass v_k of the vSSV invariant measure and its partial sums
inline double vssv_vk(double lambda, int k) {
    return (1.0 - 2.0 * lambda) / lambda * std::pow(lambda / (1.0 - lambda), k);
}

inline double vssv_vk_sum(double lambda, int K) {
    double s = 0.0;
    for (int k = 1; k <= K; ++k) s += vssv_vk(lambda, k);
    return s;
}

// Z of the full-branch Lebesgue family on the vSSV map: sum a_k^{1-q0}
inline double vssv_lebesgue_z(double lambda, double q0, int K) {
    double s = 0.0;
    for (int k = 1; k <= K; ++k)
        s += std::pow(std::pow(lambda, k - 1) * (1.0 - lambda), 1.0 - q0);
    return s;
}

// one exact step of the vSSV transfer operator on branch-constant densities
// (independent of the PiecewiseDensity machinery); values[j] on W_j, 1-based
inline std::vector<double> vssv_push_branch_constant(double lambda,
                                                     const std::vector<double>& rho) {
    const int K = static_cast<int>(rho.size()) - 1;
    std::vector<double> out(rho.size(), 0.0);
    double c1 = 1.0 - lambda, ck = lambda * (1.0 - lambda);
    double prefix = 0.0;
    for (int j = 1; j <= K; ++j) {
        if (j + 1 <= K) {
            prefix = 0.0;
            for (int k = 2; k <= j + 1; ++k) prefix += rho[k];
        }
        out[j] = c1 * rho[1] + ck * prefix;
    }
    return out;
}

// Riemann-type quadrature of Cov(f, f o T^n) for the doubling map with
// f = x^{-tau}, using the substitution x = u^{1/(1-tau)} to absorb the
// singularity; grid must be fine because f(T^n x) is rough
inline double doubling_cov_quadrature(double tau, int n, std::int64_t grid) {
    double s = 0.0;
    double sexp = 1.0 / (1.0 - tau);
    const std::uint64_t shift = static_cast<std::uint64_t>(1) << n;
    for (std::int64_t i = 0; i < grid; ++i) {
        double u = (i + 0.5) / grid;
        double x = std::pow(u, sexp);
        double tx = x * static_cast<double>(shift);
        tx -= std::floor(tx);
        if (tx <= 0.0) tx = 1.0;
        // x^{-tau} dx = sexp du under x = u^{sexp}; only f(T^n x) remains
        s += std::pow(tx, -tau) * sexp;
    }
    double ef = 1.0 / (1.0 - tau);
    return s / grid - ef * ef;
}

// dense-pair lower bound on the dynamically Holder seminorm of log|T'| on a
// single branch (true separation times from joint orbit refinement)
template <typename DerivFn, typename SepFn>
double log_jacobian_pair_oracle(DerivFn&& deriv, SepFn&& sep, double lo, double hi,
                                double gamma, int grid) {
    double best = 0.0;
    for (int i = 1; i < grid; ++i) {
        for (int j = i + 1; j < grid; ++j) {
            double x = lo + (hi - lo) * i / grid;
            double y = lo + (hi - lo) * j / grid;
            int s = sep(x, y);
            if (s < 0) continue;
            double d = std::abs(std::log(std::abs(deriv(x))) - std::log(std::abs(deriv(y))));
            best = std::max(best, d / std::pow(gamma, s));
        }
    }
    return best;
}

// ||f_k||_{L^{1/t}(Leb)} for f = x^{-tau} on W_k = (2^{-k}, 2^{-k+1}]
inline double dyadic_piece_norm(double tau, double t, int k) {
    double e = 1.0 - tau / t;
    double hi = std::pow(2.0, e * (1 - k)), lo = std::pow(2.0, e * (-k));
    return std::pow((hi - lo) / e, t);
}

} // namespace oracles

#endif
