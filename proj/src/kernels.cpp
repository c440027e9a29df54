#include "taira/kernels.hpp"

#include <cassert>
#include <cmath>

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#endif
#if defined(__aarch64__)
#include <arm_neon.h>
#endif

namespace taira::kernels {

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return "scalar";
        case Isa::Avx2: return "avx2";
        case Isa::Neon: return "neon";
    }
    return "scalar";
}

bool isa_available(Isa isa) {
    switch (isa) {
        case Isa::Scalar: return true;
        case Isa::Avx2:
#if defined(__x86_64__) || defined(__i386__)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Isa::Neon:
#if defined(__aarch64__)
            return true;
#else
            return false;
#endif
    }
    return false;
}

Isa active_isa() {
    static const Isa isa = [] {
        if (isa_available(Isa::Avx2)) return Isa::Avx2;
        if (isa_available(Isa::Neon)) return Isa::Neon;
        return Isa::Scalar;
    }();
    return isa;
}

namespace scalar {

double dot(std::span<const float> a, std::span<const float> b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * b[i];
    return acc;
}

}  // namespace scalar

#if defined(__x86_64__) || defined(__i386__)
namespace avx2 {

// Products are formed in float and widened to double before accumulation so
// the result tracks the scalar reference closely.
__attribute__((target("avx2,fma"))) double dot(std::span<const float> a,
                                               std::span<const float> b) {
    assert(a.size() == b.size());
    const std::size_t n = a.size();
    __m256d acc_lo = _mm256_setzero_pd();
    __m256d acc_hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 va = _mm256_loadu_ps(a.data() + i);
        __m256 vb = _mm256_loadu_ps(b.data() + i);
        __m256d a_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(va));
        __m256d a_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(va, 1));
        __m256d b_lo = _mm256_cvtps_pd(_mm256_castps256_ps128(vb));
        __m256d b_hi = _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1));
        acc_lo = _mm256_fmadd_pd(a_lo, b_lo, acc_lo);
        acc_hi = _mm256_fmadd_pd(a_hi, b_hi, acc_hi);
    }
    __m256d acc = _mm256_add_pd(acc_lo, acc_hi);
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double total = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) total += static_cast<double>(a[i]) * b[i];
    return total;
}

}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {

double dot(std::span<const float> a, std::span<const float> b) {
    assert(a.size() == b.size());
    const std::size_t n = a.size();
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t va = vld1q_f32(a.data() + i);
        float32x4_t vb = vld1q_f32(b.data() + i);
        acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(va)), vcvt_f64_f32(vget_low_f32(vb)));
        acc1 = vfmaq_f64(acc1, vcvt_high_f64_f32(va), vcvt_high_f64_f32(vb));
    }
    double total = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) total += static_cast<double>(a[i]) * b[i];
    return total;
}

}  // namespace neon
#endif

double dot(Isa isa, std::span<const float> a, std::span<const float> b) {
    switch (isa) {
#if defined(__x86_64__) || defined(__i386__)
        case Isa::Avx2: return avx2::dot(a, b);
#endif
#if defined(__aarch64__)
        case Isa::Neon: return neon::dot(a, b);
#endif
        default: return scalar::dot(a, b);
    }
}

double dot(std::span<const float> a, std::span<const float> b) { return dot(active_isa(), a, b); }

double norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const float> a, std::span<const float> b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

}  // namespace taira::kernels
