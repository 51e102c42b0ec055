#include "lgcnet/error.hpp"
#include "lgcnet/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace lgcnet::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(LGCNET_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("LGCNET_SIMD")) {
        if (std::string(env) == "scalar") return Isa::scalar;
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::scalar: return true;
        case Isa::avx2: return cpu_has_avx2();
    }
    return false;
}

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (!isa_supported(isa)) {
        throw Error("SIMD variant '" + std::string(isa_name(isa)) + "' is not available");
    }
    current().store(isa, std::memory_order_relaxed);
}

KernelMoments kernel_moments(Isa isa, std::span<const double> x, std::span<const double> y,
                             double px, double py, double b1, double b2) {
    if (x.size() != y.size()) throw Error("kernel_moments: length mismatch");
#if defined(LGCNET_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::kernel_moments_avx2(x.data(), y.data(), x.size(), px, py, b1, b2);
#endif
    (void)isa;
    return detail::kernel_moments_scalar(x.data(), y.data(), x.size(), px, py, b1, b2);
}

KernelMoments kernel_moments(std::span<const double> x, std::span<const double> y,
                             double px, double py, double b1, double b2) {
    return kernel_moments(active_isa(), x, y, px, py, b1, b2);
}

PairSums masked_pair_sums(Isa isa, std::span<const double> x, std::span<const double> y,
                          double cx, double cy) {
    if (x.size() != y.size()) throw Error("masked_pair_sums: length mismatch");
#if defined(LGCNET_HAVE_AVX2)
    if (isa == Isa::avx2) return detail::masked_pair_sums_avx2(x.data(), y.data(), x.size(), cx, cy);
#endif
    (void)isa;
    return detail::masked_pair_sums_scalar(x.data(), y.data(), x.size(), cx, cy);
}

PairSums masked_pair_sums(std::span<const double> x, std::span<const double> y,
                          double cx, double cy) {
    return masked_pair_sums(active_isa(), x, y, cx, cy);
}

}  // namespace lgcnet::kernels
