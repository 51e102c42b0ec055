#include "lgcnet/kernels.hpp"

#include <cmath>

namespace lgcnet::kernels::detail {

KernelMoments kernel_moments_scalar(const double* x, const double* y, std::size_t n,
                                    double px, double py, double b1, double b2) {
    const double inv1 = 1.0 / (b1 * b1);
    const double inv2 = 1.0 / (b2 * b2);
    KernelMoments m;
    for (std::size_t i = 0; i < n; ++i) {
        const double u1 = x[i] - px;
        const double u2 = y[i] - py;
        const double e = std::exp(-0.5 * (u1 * u1 * inv1 + u2 * u2 * inv2));
        m.s0 += e;
        m.s1 += e * u1;
        m.s2 += e * u2;
        m.s11 += e * u1 * u1;
        m.s22 += e * u2 * u2;
        m.s12 += e * u1 * u2;
    }
    return m;
}

PairSums masked_pair_sums_scalar(const double* x, const double* y, std::size_t n,
                                 double cx, double cy) {
    PairSums s;
    for (std::size_t i = 0; i < n; ++i) {
        if (std::isnan(x[i]) || std::isnan(y[i])) continue;
        const double d = x[i] - cx;
        const double e = y[i] - cy;
        ++s.n;
        s.sx += d;
        s.sy += e;
        s.sxx += d * d;
        s.syy += e * e;
        s.sxy += d * e;
    }
    return s;
}

}  // namespace lgcnet::kernels::detail
