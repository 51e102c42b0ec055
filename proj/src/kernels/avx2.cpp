// Compiled with -mavx2 -mfma; only reached through the runtime dispatcher.

#include "lgcnet/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace lgcnet::kernels::detail {
namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// exp(x) for x <= 0. Range reduction x = k ln2 + r with |r| <= ln2/2, then a
// degree-13 Taylor polynomial (truncation error < 1e-17). Inputs below -708
// flush to zero.
inline __m256d exp_nonpositive(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    const __m256d lower = _mm256_set1_pd(-708.0);

    const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
    x = _mm256_max_pd(x, lower);

    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
    r = _mm256_fnmadd_pd(k, ln2_lo, r);

    static constexpr double c[] = {
        1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
        1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
        1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
        1.0,                1.0};
    __m256d p = _mm256_set1_pd(c[0]);
    for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(c[i]));

    __m256i ki = _mm256_cvtepi32_epi64(_mm256_cvtpd_epi32(k));
    ki = _mm256_slli_epi64(_mm256_add_epi64(ki, _mm256_set1_epi64x(1023)), 52);
    const __m256d scale = _mm256_castsi256_pd(ki);
    return _mm256_andnot_pd(underflow, _mm256_mul_pd(p, scale));
}

}  // namespace

KernelMoments kernel_moments_avx2(const double* x, const double* y, std::size_t n,
                                  double px, double py, double b1, double b2) {
    const double inv1 = 1.0 / (b1 * b1);
    const double inv2 = 1.0 / (b2 * b2);
    const __m256d vpx = _mm256_set1_pd(px);
    const __m256d vpy = _mm256_set1_pd(py);
    const __m256d vinv1 = _mm256_set1_pd(-0.5 * inv1);
    const __m256d vinv2 = _mm256_set1_pd(-0.5 * inv2);

    __m256d a0 = _mm256_setzero_pd(), a1 = a0, a2 = a0, a11 = a0, a22 = a0, a12 = a0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d u1 = _mm256_sub_pd(_mm256_loadu_pd(x + i), vpx);
        const __m256d u2 = _mm256_sub_pd(_mm256_loadu_pd(y + i), vpy);
        const __m256d q = _mm256_fmadd_pd(_mm256_mul_pd(u1, u1), vinv1,
                                          _mm256_mul_pd(_mm256_mul_pd(u2, u2), vinv2));
        const __m256d e = exp_nonpositive(q);
        const __m256d eu1 = _mm256_mul_pd(e, u1);
        const __m256d eu2 = _mm256_mul_pd(e, u2);
        a0 = _mm256_add_pd(a0, e);
        a1 = _mm256_add_pd(a1, eu1);
        a2 = _mm256_add_pd(a2, eu2);
        a11 = _mm256_fmadd_pd(eu1, u1, a11);
        a22 = _mm256_fmadd_pd(eu2, u2, a22);
        a12 = _mm256_fmadd_pd(eu1, u2, a12);
    }
    KernelMoments m{hsum(a0), hsum(a1), hsum(a2), hsum(a11), hsum(a22), hsum(a12)};
    if (i < n) {
        const KernelMoments tail = kernel_moments_scalar(x + i, y + i, n - i, px, py, b1, b2);
        m.s0 += tail.s0;
        m.s1 += tail.s1;
        m.s2 += tail.s2;
        m.s11 += tail.s11;
        m.s22 += tail.s22;
        m.s12 += tail.s12;
    }
    return m;
}

PairSums masked_pair_sums_avx2(const double* x, const double* y, std::size_t n,
                               double cx, double cy) {
    const __m256d vcx = _mm256_set1_pd(cx);
    const __m256d vcy = _mm256_set1_pd(cy);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d cnt = _mm256_setzero_pd(), ax = cnt, ay = cnt, axx = cnt, ayy = cnt, axy = cnt;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        const __m256d mask = _mm256_and_pd(_mm256_cmp_pd(vx, vx, _CMP_ORD_Q),
                                           _mm256_cmp_pd(vy, vy, _CMP_ORD_Q));
        const __m256d d = _mm256_and_pd(mask, _mm256_sub_pd(vx, vcx));
        const __m256d e = _mm256_and_pd(mask, _mm256_sub_pd(vy, vcy));
        cnt = _mm256_add_pd(cnt, _mm256_and_pd(mask, one));
        ax = _mm256_add_pd(ax, d);
        ay = _mm256_add_pd(ay, e);
        axx = _mm256_fmadd_pd(d, d, axx);
        ayy = _mm256_fmadd_pd(e, e, ayy);
        axy = _mm256_fmadd_pd(d, e, axy);
    }
    PairSums s;
    s.n = static_cast<std::size_t>(hsum(cnt));
    s.sx = hsum(ax);
    s.sy = hsum(ay);
    s.sxx = hsum(axx);
    s.syy = hsum(ayy);
    s.sxy = hsum(axy);
    if (i < n) {
        const PairSums tail = masked_pair_sums_scalar(x + i, y + i, n - i, cx, cy);
        s.n += tail.n;
        s.sx += tail.sx;
        s.sy += tail.sy;
        s.sxx += tail.sxx;
        s.syy += tail.syy;
        s.sxy += tail.sxy;
    }
    return s;
}

}  // namespace lgcnet::kernels::detail
