#ifndef PEXMAP_RNG_HPP
#define PEXMAP_RNG_HPP

#include <cstdint>
#include <cstdlib>
#include <random>
#include <thread>
#include <vector>

#include "pexmap/density.hpp"

namespace pexmap {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// per-stream seed derived deterministically from (master seed, stream index)
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(splitmix64(master) ^ splitmix64(stream * 0x9E3779B97F4A7C15ULL + 1));
}

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // uniform in [0,1), 53-bit resolution; explicit so output is portable
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + uniform01() * (b - a); }

private:
    std::mt19937_64 eng_;
};

// Stationary trajectory of the doubling map as a sliding 64-bit window over
// an i.i.d. bit stream. Naive double-precision iteration of 2x mod 1 shifts
// its mantissa empty after 53 steps; the bit window is the map itself.
class DoublingBitStream {
public:
    explicit DoublingBitStream(std::uint64_t seed) : rng_(seed) {
        window_ = rng_.bits();
        buffer_ = rng_.bits();
        remaining_ = 64;
    }

    double current() const {
        // (0,1] convention: an all-zero window maps to 1
        return window_ ? static_cast<double>(window_) * 0x1.0p-64 : 1.0;
    }

    void step() {
        std::uint64_t bit = buffer_ >> 63;
        buffer_ <<= 1;
        if (--remaining_ == 0) {
            buffer_ = rng_.bits();
            remaining_ = 64;
        }
        window_ = (window_ << 1) | bit;
    }

private:
    RngStream rng_;
    std::uint64_t window_ = 0;
    std::uint64_t buffer_ = 0;
    int remaining_ = 0;
};

// inverse-CDF sampler for a piecewise-constant probability density
class PiecewiseConstantSampler {
public:
    explicit PiecewiseConstantSampler(const PiecewiseDensity& d) {
        const auto& bp = d.breakpoints();
        const auto& val = d.values();
        cum_.push_back(0.0);
        for (std::size_t i = 0; i < val.size(); ++i) {
            edges_.push_back(bp[i]);
            widths_.push_back(bp[i + 1] - bp[i]);
            cum_.push_back(cum_.back() + val[i] * (bp[i + 1] - bp[i]));
        }
        double total = cum_.back();
        for (auto& c : cum_) c /= total;
    }

    double sample(RngStream& rng) const {
        double u = rng.uniform01();
        std::size_t lo = 0, hi = cum_.size() - 1;
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cum_[mid] <= u)
                lo = mid;
            else
                hi = mid;
        }
        double frac = (u - cum_[lo]) / (cum_[lo + 1] - cum_[lo]);
        return edges_[lo] + frac * widths_[lo];
    }

private:
    std::vector<double> edges_, widths_, cum_;
};

inline int default_thread_count() {
    if (const char* env = std::getenv("PEXMAP_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned n = std::thread::hardware_concurrency();
    return n > 0 ? static_cast<int>(n) : 1;
}

// static partition; fn(begin, end) per chunk; results must be written to
// disjoint slots so the outcome is independent of the thread count
template <typename Fn>
void parallel_chunks(std::size_t count, Fn&& fn, int threads = default_thread_count()) {
    if (threads <= 1 || count < 2) {
        fn(static_cast<std::size_t>(0), count);
        return;
    }
    std::vector<std::thread> pool;
    std::size_t chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        std::size_t lo = t * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& th : pool) th.join();
}

} // namespace pexmap

#endif
