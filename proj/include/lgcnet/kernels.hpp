#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference
// implementation and, on x86-64, an AVX2/FMA variant; the variant is picked
// once at runtime from CPU support and can be pinned with LGCNET_SIMD=scalar.

#include <cstddef>
#include <span>
#include <string_view>

namespace lgcnet::kernels {

enum class Isa { scalar, avx2 };

bool isa_supported(Isa isa);
std::string_view isa_name(Isa isa);

/// The variant used by the dispatching entry points below.
Isa active_isa();

/// Overrides the dispatch choice (tests, benchmarks). Throws lgcnet::Error if
/// the requested variant is not available on this CPU or build.
void set_active_isa(Isa isa);

/// Sums of unnormalized Gaussian kernel weights e_i = exp(-(u1^2/b1^2 + u2^2/b2^2)/2)
/// and their first and second moments, with u = (x_i - px, y_i - py).
struct KernelMoments {
    double s0 = 0.0;
    double s1 = 0.0;   // sum e * u1
    double s2 = 0.0;   // sum e * u2
    double s11 = 0.0;  // sum e * u1^2
    double s22 = 0.0;  // sum e * u2^2
    double s12 = 0.0;  // sum e * u1 * u2
};

/// Sums over positions where both x and y are non-NaN, of the deviations
/// d = x - cx and e = y - cy.
struct PairSums {
    std::size_t n = 0;
    double sx = 0.0;
    double sy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
};

KernelMoments kernel_moments(std::span<const double> x, std::span<const double> y,
                             double px, double py, double b1, double b2);
KernelMoments kernel_moments(Isa isa, std::span<const double> x, std::span<const double> y,
                             double px, double py, double b1, double b2);

PairSums masked_pair_sums(std::span<const double> x, std::span<const double> y,
                          double cx, double cy);
PairSums masked_pair_sums(Isa isa, std::span<const double> x, std::span<const double> y,
                          double cx, double cy);

namespace detail {
KernelMoments kernel_moments_scalar(const double* x, const double* y, std::size_t n,
                                    double px, double py, double b1, double b2);
PairSums masked_pair_sums_scalar(const double* x, const double* y, std::size_t n,
                                 double cx, double cy);
#if defined(LGCNET_HAVE_AVX2)
KernelMoments kernel_moments_avx2(const double* x, const double* y, std::size_t n,
                                  double px, double py, double b1, double b2);
PairSums masked_pair_sums_avx2(const double* x, const double* y, std::size_t n,
                               double cx, double cy);
#endif
}  // namespace detail

}  // namespace lgcnet::kernels
