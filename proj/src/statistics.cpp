#include "pexmap/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "pexmap/errors.hpp"
#include "pexmap/rng.hpp"

namespace pexmap {

ObservableSpec ObservableSpec::polynomial(std::vector<double> coeffs) {
    ObservableSpec f;
    f.kind = Kind::polynomial;
    f.coefficients = std::move(coeffs);
    return f;
}

ObservableSpec ObservableSpec::indicator_of(Interval iv) {
    ObservableSpec f;
    f.kind = Kind::indicator;
    f.interval = iv;
    return f;
}

ObservableSpec ObservableSpec::power_singularity(double tau) {
    if (!(tau > 0.0 && tau < 1.0))
        throw Error(ErrorCode::non_integrable, "power singularity needs tau in (0,1)");
    ObservableSpec f;
    f.kind = Kind::power_singularity;
    f.tau = tau;
    return f;
}

double ObservableSpec::eval(double x) const {
    switch (kind) {
        case Kind::polynomial: {
            double v = 0.0;
            for (std::size_t i = coefficients.size(); i-- > 0;) v = v * x + coefficients[i];
            return v;
        }
        case Kind::indicator:
            return interval.contains(x) ? 1.0 : 0.0;
        case Kind::power_singularity:
            if (x <= 0.0) return 0.0;
            return std::pow(std::max(x, eps_sing), -tau);
        case Kind::piecewise: {
            for (const auto& [iv, c] : pieces)
                if (iv.contains(x)) {
                    double v = 0.0;
                    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
                    return v;
                }
            return 0.0;
        }
    }
    return 0.0;
}

PiecewisePoly ObservableSpec::as_poly() const {
    switch (kind) {
        case Kind::polynomial:
            return PiecewisePoly::from_pieces({0.0, 1.0}, {coefficients});
        case Kind::indicator: {
            std::vector<double> bp{0.0, interval.lo, interval.hi, 1.0};
            std::sort(bp.begin(), bp.end());
            std::vector<double> dd;
            for (double p : bp)
                if (dd.empty() || !points_equal(dd.back(), p)) dd.push_back(p);
            std::vector<std::vector<double>> cs;
            for (std::size_t i = 0; i + 1 < dd.size(); ++i) {
                double mid = 0.5 * (dd[i] + dd[i + 1]);
                cs.push_back({interval.contains(mid) ? 1.0 : 0.0});
            }
            return PiecewisePoly::from_pieces(std::move(dd), std::move(cs));
        }
        case Kind::piecewise: {
            std::vector<double> bp{0.0, 1.0};
            for (const auto& [iv, c] : pieces) {
                bp.push_back(iv.lo);
                bp.push_back(iv.hi);
            }
            std::sort(bp.begin(), bp.end());
            std::vector<double> dd;
            for (double p : bp)
                if (dd.empty() || !points_equal(dd.back(), p)) dd.push_back(p);
            std::vector<std::vector<double>> cs;
            for (std::size_t i = 0; i + 1 < dd.size(); ++i) {
                double mid = 0.5 * (dd[i] + dd[i + 1]);
                std::vector<double> c{0.0};
                for (const auto& [iv, pc] : pieces)
                    if (iv.contains(mid)) c = pc;
                cs.push_back(std::move(c));
            }
            return PiecewisePoly::from_pieces(std::move(dd), std::move(cs));
        }
        case Kind::power_singularity:
            throw Error(ErrorCode::bad_parameter, "power singularity is not polynomial");
    }
    throw Error(ErrorCode::bad_parameter, "unknown observable kind");
}

double expectation(const PiecewiseDensity& density, const ObservableSpec& f) {
    if (f.kind == ObservableSpec::Kind::power_singularity) {
        if (f.tau >= 1.0) throw Error(ErrorCode::non_integrable, "tau >= 1 not integrable");
        return PiecewisePoly::from_density(density).integral_against_power(f.tau);
    }
    return f.as_poly().multiply(PiecewisePoly::from_density(density)).integral();
}

PiecewiseDensity invariant_density(const MapModel& map) {
    const auto& g = map.generator();
    if (g.family == Family::doubling || g.family == Family::dyadic)
        return PiecewiseDensity::uniform();
    if (g.family == Family::vssv) return closed_form_vssv_density(g.lambda, map.truncation());
    throw Error(ErrorCode::bad_parameter,
                "no closed-form invariant density for this map; use the Ulam estimate");
}

namespace {

// ---- exact path for singular f on the doubling map ----------------------
//
// T^n_*(x^{-tau})(y) = 2^{n(tau-1)} sum_{j=0}^{2^n-1} (y+j)^{-tau}, so each
// covariance reduces to integrals int_0^1 g(y) (y+j)^{-tau} dy. The j = 0
// term is closed-form; j >= 1 integrands are smooth after removing g's own
// singularity with the substitution y = u^{1/(1-tau_g)}.

struct GaussLegendre {
    std::vector<double> x, w;  // nodes on (0,1)
    GaussLegendre() {
        // 64-point rule, generated by Newton iteration on Legendre P_64
        const int n = 64;
        x.resize(n);
        w.resize(n);
        for (int i = 0; i < n; ++i) {
            double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = t;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                double dp = n * (t * p1 - p0) / (t * t - 1.0);
                double step = p1 / dp;
                t -= step;
                if (std::abs(step) < 1e-16) break;
            }
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (t * p1 - p0) / (t * t - 1.0);
            x[i] = 0.5 * (1.0 - t);
            w[i] = 1.0 / ((1.0 - t * t) * dp * dp);
        }
    }
};

const GaussLegendre& gl64() {
    static GaussLegendre g;
    return g;
}

// int_0^1 y^{-a} phi(y) dy for smooth phi and a in [0,1): substitute
// y = u^{1/(1-a)} so the integrand becomes s * phi(u^s)
template <typename Phi>
double singular_integral(double a, Phi&& phi) {
    const auto& g = gl64();
    if (a <= 0.0) {
        double s = 0.0;
        for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * phi(g.x[i]);
        return s;
    }
    double sexp = 1.0 / (1.0 - a);
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) {
        double y = std::pow(g.x[i], sexp);
        s += g.w[i] * phi(y);
    }
    return sexp * s;
}

double doubling_singular_cov(const ObservableSpec& f, const ObservableSpec& g, int n) {
    const double tau = f.tau;
    const double tg = g.kind == ObservableSpec::Kind::power_singularity ? g.tau : 0.0;
    if (tau + tg >= 1.0)
        throw Error(ErrorCode::non_integrable, "f*g not integrable against Lebesgue");
    // 2^n quadrature terms per covariance; beyond this use monte-carlo
    if (n > 22) throw Error(ErrorCode::bad_parameter, "exact singular path capped at n = 22");
    const std::int64_t terms = static_cast<std::int64_t>(1) << n;
    double total = 0.0;
    if (g.kind == ObservableSpec::Kind::power_singularity) {
        total += 1.0 / (1.0 - tau - tg);  // j = 0
        for (std::int64_t j = 1; j < terms; ++j) {
            double jj = static_cast<double>(j);
            total += singular_integral(tg, [&](double y) { return std::pow(y + jj, -tau); });
        }
    } else {
        auto gp = g.as_poly();
        // j = 0: piecewise closed form of int g(y) y^{-tau}
        total += gp.integral_against_power(tau);
        const auto& q = gl64();
        for (std::int64_t j = 1; j < terms; ++j) {
            double jj = static_cast<double>(j);
            // integrate per polynomial piece; smooth integrand for j >= 1
            double s = 0.0;
            const auto& bp = gp.breakpoints();
            for (std::size_t p = 0; p + 1 < bp.size(); ++p) {
                double a = bp[p], b = bp[p + 1];
                double acc = 0.0;
                for (std::size_t i = 0; i < q.x.size(); ++i) {
                    double y = a + (b - a) * q.x[i];
                    acc += q.w[i] * gp.eval(y) * std::pow(y + jj, -tau);
                }
                s += acc * (b - a);
            }
            total += s;
        }
    }
    double ef = 1.0 / (1.0 - tau);
    double eg;
    if (g.kind == ObservableSpec::Kind::power_singularity)
        eg = 1.0 / (1.0 - tg);
    else
        eg = g.as_poly().integral();
    return std::pow(2.0, n * (tau - 1.0)) * total - ef * eg;
}

// general stationary trajectory over mu: the doubling map runs on the bit
// stream, everything else iterates doubles
class Trajectory {
public:
    Trajectory(const MapModel& map, const PiecewiseConstantSampler* sampler,
               std::uint64_t seed)
        : map_(&map), rng_(seed) {
        use_bits_ = map.generator().family == Family::doubling && map.iterate() == 1;
        if (use_bits_) {
            bits_.emplace(seed);
        } else {
            x_ = sampler->sample(rng_);
            if (x_ <= 0.0) x_ = 0.5;
        }
    }

    double current() const { return use_bits_ ? bits_->current() : x_; }

    void step() {
        if (use_bits_) {
            bits_->step();
            return;
        }
        if (x_ <= map_->coverage_left() || x_ > 1.0) {
            // fell below truncation: park at a fresh uniform point of the
            // covered region (measure-zero event for the maps studied here)
            x_ = map_->coverage_left() +
                 rng_.uniform01() * (1.0 - map_->coverage_left());
        }
        x_ = map_->apply(x_);
    }

private:
    const MapModel* map_;
    RngStream rng_;
    std::optional<DoublingBitStream> bits_;
    double x_ = 0.0;
    bool use_bits_ = false;
};

} // namespace

CorrelationSeries correlation_series(const MapModel& map, const ObservableSpec& f,
                                     const ObservableSpec& g, int n_max,
                                     CorrelationMethod method, const McOptions& mc) {
    CorrelationSeries out;
    out.method = method;

    if (method == CorrelationMethod::exact) {
        if (f.singular() || g.singular()) {
            bool doubling = map.generator().family == Family::doubling && map.iterate() == 1;
            if (!doubling || !f.singular())
                throw Error(ErrorCode::bad_parameter,
                            "exact singular correlations implemented on the doubling map "
                            "with singular f; use monte-carlo");
            for (int n = 0; n <= n_max; ++n) out.cov.push_back(doubling_singular_cov(f, g, n));
        } else {
            PiecewiseDensity h = invariant_density(map);
            PiecewisePoly fh = f.as_poly().multiply(PiecewisePoly::from_density(h));
            PiecewisePoly gp = g.as_poly();
            double ef = fh.integral();
            double eg = gp.multiply(PiecewisePoly::from_density(h)).integral();
            PiecewisePoly cur = fh;
            for (int n = 0; n <= n_max; ++n) {
                out.cov.push_back(gp.multiply(cur).integral() - ef * eg);
                if (n < n_max) cur = pushforward_poly(map, cur);
            }
        }
    } else {
        // batch means over fixed blocks: per-block covariance estimates, so
        // the result is independent of the thread count and standard errors
        // come straight from the block spread
        PiecewiseDensity h = invariant_density(map);
        PiecewiseConstantSampler sampler(h);
        const std::size_t S = mc.samples;
        const std::size_t B = std::min<std::size_t>(512, std::max<std::size_t>(8, S / 64));
        struct Block {
            std::vector<double> sfg, sg;
            double sf = 0.0;
            std::size_t count = 0;
        };
        std::vector<Block> blocks(B);
        for (auto& b : blocks) {
            b.sfg.assign(n_max + 1, 0.0);
            b.sg.assign(n_max + 1, 0.0);
        }
        parallel_chunks(B, [&](std::size_t blo, std::size_t bhi) {
            for (std::size_t bi = blo; bi < bhi; ++bi) {
                std::size_t lo = bi * S / B, hi = (bi + 1) * S / B;
                Block& blk = blocks[bi];
                for (std::size_t s = lo; s < hi; ++s) {
                    Trajectory tr(map, &sampler, derive_seed(mc.seed, s));
                    double fx = f.eval(tr.current());
                    blk.sf += fx;
                    for (int n = 0; n <= n_max; ++n) {
                        double gy = g.eval(tr.current());
                        blk.sfg[n] += fx * gy;
                        blk.sg[n] += gy;
                        if (n < n_max) tr.step();
                    }
                    ++blk.count;
                }
            }
        });
        for (int n = 0; n <= n_max; ++n) {
            double m = 0.0, m2 = 0.0;
            std::size_t used = 0;
            for (const auto& blk : blocks) {
                if (blk.count == 0) continue;
                double c = blk.sfg[n] / blk.count -
                           (blk.sf / blk.count) * (blk.sg[n] / blk.count);
                m += c;
                m2 += c * c;
                ++used;
            }
            m /= used;
            m2 /= used;
            out.cov.push_back(m);
            out.stderrs.push_back(std::sqrt(std::max(0.0, m2 - m * m) / used));
        }
    }

    // geometric fit over n >= 1
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (int n = 1; n < static_cast<int>(out.cov.size()); ++n) {
            double a = std::abs(out.cov[n]);
            if (!(a > 1e-300)) continue;
            double x = n, y = std::log(a);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            ++m;
        }
        if (m >= 2) {
            double denom = m * sxx - sx * sx;
            double slope = (m * sxy - sx * sy) / denom;
            out.fitted_rate = std::exp(slope);
            out.fitted_intercept = (sy - slope * sx) / m;
        }
    }
    return out;
}

GreenKubo green_kubo_sigma(const CorrelationSeries& series, int truncation) {
    if (series.cov.empty()) throw Error(ErrorCode::bad_parameter, "empty series");
    GreenKubo r;
    double s = series.cov[0];
    int n_last = std::min<int>(truncation, static_cast<int>(series.cov.size()) - 1);
    for (int n = 1; n <= n_last; ++n) s += 2.0 * series.cov[n];
    double rate = series.fitted_rate;
    if (rate > 0.0 && rate < 1.0)
        r.tail_bound = 2.0 * std::abs(series.cov[n_last]) * rate / (1.0 - rate);
    if (s < 0.0) {
        r.sigma2 = 0.0;
        r.coboundary = true;
    } else {
        r.sigma2 = s;
    }
    return r;
}

CltReport birkhoff_clt_report(const MapModel& map, const ObservableSpec& f, int horizon,
                              std::size_t samples, std::uint64_t seed, double sigma2) {
    if (!(sigma2 > 0.0))
        throw Error(ErrorCode::bad_parameter, "CLT diagnostic needs sigma^2 > 0");
    CltReport rep;
    rep.sigma2 = sigma2;
    rep.samples = samples;
    rep.low_sample_warning = samples < 1000;

    PiecewiseDensity h = invariant_density(map);
    PiecewiseConstantSampler sampler(h);
    double ef = expectation(h, f);

    // checkpoints for the variance-scaling fit
    std::vector<int> horizons;
    for (int j = 1; j <= 5; ++j) horizons.push_back(horizon * j / 5);
    rep.horizons = horizons;

    std::vector<std::vector<double>> sums(samples);
    parallel_chunks(samples, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s) {
            Trajectory tr(map, &sampler, derive_seed(seed, s));
            double acc = 0.0;
            std::size_t ci = 0;
            sums[s].resize(horizons.size());
            for (int n = 0; n < horizon; ++n) {
                acc += f.eval(tr.current());
                if (ci < horizons.size() && n + 1 == horizons[ci]) sums[s][ci++] = acc;
                if (n + 1 < horizon) tr.step();
            }
            while (ci < horizons.size()) sums[s][ci++] = acc;
        }
    });

    // KS distance of (S_n - n Ef)/sqrt(n) against Normal(0, sigma2)
    std::vector<double> z(samples);
    for (std::size_t s = 0; s < samples; ++s)
        z[s] = (sums[s].back() - horizon * ef) / std::sqrt(static_cast<double>(horizon));
    std::sort(z.begin(), z.end());
    double sd = std::sqrt(sigma2);
    double ks = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        double cdf = 0.5 * std::erfc(-z[i] / (sd * std::sqrt(2.0)));
        double lo = static_cast<double>(i) / z.size();
        double hi = static_cast<double>(i + 1) / z.size();
        ks = std::max({ks, std::abs(cdf - lo), std::abs(cdf - hi)});
    }
    rep.ks_distance = ks;

    // Var(S_n) against n
    rep.variances.resize(horizons.size());
    for (std::size_t j = 0; j < horizons.size(); ++j) {
        double m = 0.0, m2 = 0.0;
        for (std::size_t s = 0; s < samples; ++s) {
            m += sums[s][j];
            m2 += sums[s][j] * sums[s][j];
        }
        m /= samples;
        m2 /= samples;
        rep.variances[j] = m2 - m * m;
    }
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = static_cast<int>(horizons.size());
        for (int j = 0; j < m; ++j) {
            sx += horizons[j];
            sy += rep.variances[j];
            sxx += static_cast<double>(horizons[j]) * horizons[j];
            sxy += horizons[j] * rep.variances[j];
        }
        rep.variance_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    return rep;
}

TailNormSeries tail_norm_series(double tau, double t, int n_max) {
    if (!(t > tau)) throw Error(ErrorCode::divergent_series, "tail norms diverge for t <= tau");
    if (!(t < 0.5)) throw Error(ErrorCode::bad_parameter, "t must lie in (tau, 0.5)");
    TailNormSeries s;
    // ||f_k||_{L^{1/t}} = (int_{2^{-k}}^{2^{-k+1}} x^{-tau/t} dx)^t
    //                   = C * 2^{-k(t - tau)} exactly; geometric tail summed
    // in closed form
    const double e = 1.0 - tau / t;
    const double C = std::pow((std::pow(2.0, e) - 1.0) / e, t);
    const double rate = std::pow(2.0, tau - t);
    for (int n = 1; n <= n_max; ++n) {
        double term_n = C * std::pow(2.0, -static_cast<double>(n) * (t - tau));
        s.values.push_back(term_n / (1.0 - rate));
    }
    {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (int n = 1; n <= n_max; ++n) {
            double y = std::log(s.values[n - 1]);
            sx += n;
            sy += y;
            sxx += static_cast<double>(n) * n;
            sxy += n * y;
            ++m;
        }
        double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        s.fitted_rate = std::exp(slope);
    }
    return s;
}

} // namespace pexmap
