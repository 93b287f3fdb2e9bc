#ifndef PEXMAP_STATISTICS_HPP
#define PEXMAP_STATISTICS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pexmap/density.hpp"
#include "pexmap/interval.hpp"
#include "pexmap/map_model.hpp"
#include "pexmap/piecewise_poly.hpp"

namespace pexmap {

struct ObservableSpec {
    enum class Kind { polynomial, indicator, power_singularity, piecewise } kind =
        Kind::polynomial;
    std::vector<double> coefficients;  // polynomial, ascending powers
    Interval interval;                 // indicator
    double tau = 0.0;                  // power_singularity: x -> x^{-tau}
    std::vector<std::pair<Interval, std::vector<double>>> pieces;  // piecewise
    double eps_sing = 0x1.0p-40;       // singularity cutoff for MC evaluation

    static ObservableSpec polynomial(std::vector<double> coeffs);
    static ObservableSpec indicator_of(Interval iv);
    static ObservableSpec power_singularity(double tau);

    bool singular() const { return kind == Kind::power_singularity; }
    double eval(double x) const;
    PiecewisePoly as_poly() const;  // throws for power_singularity
};

// exact expectation of f against a piecewise-constant density
double expectation(const PiecewiseDensity& density, const ObservableSpec& f);

// invariant density used by the statistics layer: Lebesgue for full-branch
// dyadic maps, the closed form for vSSV; throws otherwise
PiecewiseDensity invariant_density(const MapModel& map);

enum class CorrelationMethod { exact, monte_carlo };

struct CorrelationSeries {
    std::vector<double> cov;       // n = 0..n_max
    std::vector<double> stderrs;   // MC only
    CorrelationMethod method = CorrelationMethod::exact;
    double fitted_rate = 0.0;      // geometric fit of |cov| over n >= 1
    double fitted_intercept = 0.0;
};

struct McOptions {
    std::uint64_t seed = 1;
    std::size_t samples = 100000;
};

CorrelationSeries correlation_series(const MapModel& map, const ObservableSpec& f,
                                     const ObservableSpec& g, int n_max,
                                     CorrelationMethod method, const McOptions& mc = {});

struct GreenKubo {
    double sigma2 = 0.0;
    double tail_bound = 0.0;
    bool coboundary = false;  // set when the truncated sum came out negative
};

GreenKubo green_kubo_sigma(const CorrelationSeries& series, int truncation);

struct CltReport {
    double ks_distance = 0.0;
    double sigma2 = 0.0;            // the variance used for the reference law
    double variance_slope = 0.0;    // LS slope of Var(S_n) against n
    std::vector<int> horizons;
    std::vector<double> variances;
    std::size_t samples = 0;
    bool low_sample_warning = false;
};

// empirical distribution of (S_n - n E f)/sqrt(n) over seeded stationary
// starts, against Normal(0, sigma2)
CltReport birkhoff_clt_report(const MapModel& map, const ObservableSpec& f, int horizon,
                              std::size_t samples, std::uint64_t seed, double sigma2);

struct TailNormSeries {
    std::vector<double> values;  // S_n = sum_{k >= n} ||f_k||_{L^{1/t}}, n = 1..n_max
    double fitted_rate = 0.0;
};

// dyadic decomposition W_k = (2^{-k}, 2^{-k+1}], f = x^{-tau}, mu = Lebesgue
TailNormSeries tail_norm_series(double tau, double t, int n_max);

} // namespace pexmap

#endif
