#include "pexmap/rational.hpp"

#include "pexmap/errors.hpp"

namespace pexmap {

Rational RationalVssv::branch_length(int k) const {
    // a_k = l^{k-1}(1-l); the k = 0 slot is the sub-truncation piece (0, l^K]
    if (k == 0) {
        Rational p = 1;
        for (int i = 0; i < truncation; ++i) p *= lambda;
        return p;
    }
    Rational p = 1;
    for (int i = 0; i < k - 1; ++i) p *= lambda;
    return p * (1 - lambda);
}

RationalVssvDensity RationalVssv::lebesgue() const {
    return RationalVssvDensity{std::vector<Rational>(truncation + 1, Rational(1))};
}

RationalVssvDensity RationalVssv::invariant() const {
    if (!(lambda > 0 && lambda < Rational(1, 2)))
        throw Error(ErrorCode::no_acip, "rational invariant density needs lambda in (0,1/2)");
    RationalVssvDensity d;
    d.values.assign(truncation + 1, Rational(0));
    Rational one_minus = 1 - lambda;
    Rational dens = (1 - 2 * lambda) / (one_minus * one_minus);
    for (int k = 1; k <= truncation; ++k) {
        d.values[k] = dens;
        dens /= one_minus;
    }
    return d;
}

RationalVssvDensity RationalVssv::push(const RationalVssvDensity& d) const {
    const int K = truncation;
    if (static_cast<int>(d.values.size()) != K + 1)
        throw Error(ErrorCode::bad_parameter, "density size mismatch");
    RationalVssvDensity out;
    out.values.assign(K + 1, Rational(0));
    const Rational c1 = 1 - lambda;           // 1/Lambda_1
    const Rational ck = lambda * (1 - lambda); // 1/Lambda_k, k >= 2
    // branch 1 image is (0,1]; branch k >= 2 image is (0, l^{k-2}] covering
    // W_j for j >= k-1 and the sub-truncation piece
    std::vector<Rational> prefix(K + 2, Rational(0));
    for (int k = 2; k <= K; ++k) prefix[k] = prefix[k - 1] + d.values[k];
    for (int j = 1; j <= K; ++j) {
        int kmax = std::min(K, j + 1);
        out.values[j] = c1 * d.values[1] + ck * prefix[kmax];
    }
    out.values[0] = d.values[0] + c1 * d.values[1] + ck * prefix[K];
    return out;
}

Rational RationalVssv::mass(const RationalVssvDensity& d) const {
    Rational m = 0;
    for (int k = 0; k <= truncation; ++k) m += d.values[k] * branch_length(k);
    return m;
}

RationalVssvDensity RationalRychlik::lebesgue() const {
    return RationalVssvDensity{std::vector<Rational>(truncation + 1, Rational(1))};
}

RationalVssvDensity RationalRychlik::push(const RationalVssvDensity& d) const {
    const int K = truncation;
    RationalVssvDensity out;
    out.values.assign(K + 1, Rational(0));
    // branch k image is (0, 2^{1-k}], covering W_j for j >= k and the
    // sub-truncation piece; slope is 2 everywhere
    Rational run = 0;
    for (int j = 1; j <= K; ++j) {
        run += d.values[j];
        out.values[j] = run / 2;
    }
    out.values[0] = d.values[0] + run / 2;
    return out;
}

Rational RationalRychlik::mass(const RationalVssvDensity& d) const {
    Rational m = 0;
    Rational len(1, 2);
    for (int k = 1; k <= truncation; ++k) {
        m += d.values[k] * len;
        len /= 2;
    }
    // len is now 2^{-K-1}; the sub-truncation piece has length 2^{-K}
    m += d.values[0] * len * 2;
    return m;
}

Rational RationalRychlik::mass_below(const RationalVssvDensity& d, const Rational& x) const {
    Rational m = 0;
    Rational lo(1, 2), hi(1);  // W_1 = (1/2, 1]
    for (int k = 1; k <= truncation; ++k) {
        if (hi <= x) {
            m += d.values[k] * (hi - lo);
        } else if (lo < x) {
            m += d.values[k] * (x - lo);
        }
        hi = lo;
        lo /= 2;
    }
    // sub-truncation piece (0, 2^{-K}]
    Rational sub = hi;  // = 2^{-K}
    m += d.values[0] * (x < sub ? x : sub);
    return m;
}

RationalDyadicDensity doubling_push(const RationalDyadicDensity& d) {
    const std::size_t n = d.values.size();
    RationalDyadicDensity out;
    out.level = d.level;
    out.values.assign(n, Rational(0));
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = (d.values[i >> 1] + d.values[(i + n) >> 1]) / 2;
    return out;
}

Rational dyadic_mass(const RationalDyadicDensity& d) {
    Rational m = 0;
    for (const auto& v : d.values) m += v;
    return m / d.values.size();
}

} // namespace pexmap
