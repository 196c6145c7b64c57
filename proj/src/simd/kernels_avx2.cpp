// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include "vstain/simd/kernels.hpp"

#include <immintrin.h>

namespace vstain::simd::detail {
namespace {

inline std::uint64_t hsum_epi64(__m256i v) {
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
    return lanes[0] + lanes[1] + lanes[2] + lanes[3];
}

inline double hsum_pd(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

std::uint64_t sum_sq_diff_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
    __m256i total = _mm256_setzero_si256();
    std::size_t i = 0;
    // 32-bit lanes gain at most 4·255² per step; flush well before overflow.
    constexpr std::size_t kFlushEvery = 4096;
    while (i + 32 <= n) {
        __m256i acc32 = _mm256_setzero_si256();
        for (std::size_t step = 0; step < kFlushEvery && i + 32 <= n; ++step, i += 32) {
            const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
            const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
            const __m256i a_lo = _mm256_cvtepu8_epi16(_mm256_castsi256_si128(va));
            const __m256i a_hi = _mm256_cvtepu8_epi16(_mm256_extracti128_si256(va, 1));
            const __m256i b_lo = _mm256_cvtepu8_epi16(_mm256_castsi256_si128(vb));
            const __m256i b_hi = _mm256_cvtepu8_epi16(_mm256_extracti128_si256(vb, 1));
            const __m256i d_lo = _mm256_sub_epi16(a_lo, b_lo);
            const __m256i d_hi = _mm256_sub_epi16(a_hi, b_hi);
            acc32 = _mm256_add_epi32(acc32, _mm256_madd_epi16(d_lo, d_lo));
            acc32 = _mm256_add_epi32(acc32, _mm256_madd_epi16(d_hi, d_hi));
        }
        total = _mm256_add_epi64(total, _mm256_cvtepu32_epi64(_mm256_castsi256_si128(acc32)));
        total = _mm256_add_epi64(total, _mm256_cvtepu32_epi64(_mm256_extracti128_si256(acc32, 1)));
    }
    std::uint64_t acc = hsum_epi64(total);
    for (; i < n; ++i) {
        const int d = int(a[i]) - int(b[i]);
        acc += std::uint64_t(d * d);
    }
    return acc;
}

// floor(v / 1000) for v ≤ 255500 via multiply-high by ceil(2^32 / 1000).
inline __m256i div1000_epu32(__m256i v) {
    const __m256i magic = _mm256_set1_epi64x(4294968);
    const __m256i even = _mm256_srli_epi64(_mm256_mul_epu32(v, magic), 32);
    const __m256i odd = _mm256_mul_epu32(_mm256_srli_epi64(v, 32), magic);
    const __m256i hi_mask = _mm256_set1_epi64x(static_cast<long long>(0xFFFFFFFF00000000ULL));
    return _mm256_or_si256(even, _mm256_and_si256(odd, hi_mask));
}

void luma_u8(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t pixels) {
    const __m256i offsets = _mm256_setr_epi32(0, 3, 6, 9, 12, 15, 18, 21);
    const __m256i byte_mask = _mm256_set1_epi32(0xFF);
    const __m256i wr = _mm256_set1_epi32(299);
    const __m256i wg = _mm256_set1_epi32(587);
    const __m256i wb = _mm256_set1_epi32(114);
    const __m256i half = _mm256_set1_epi32(500);
    std::size_t i = 0;
    // Each gather reads 4 bytes per pixel, one past its blue channel; stop
    // while the final lane still has a byte to spare.
    for (; i + 8 < pixels; i += 8) {
        const __m256i v = _mm256_i32gather_epi32(reinterpret_cast<const int*>(rgb + 3 * i), offsets, 1);
        const __m256i r = _mm256_and_si256(v, byte_mask);
        const __m256i g = _mm256_and_si256(_mm256_srli_epi32(v, 8), byte_mask);
        const __m256i b = _mm256_and_si256(_mm256_srli_epi32(v, 16), byte_mask);
        __m256i sum = _mm256_add_epi32(_mm256_mullo_epi32(r, wr), _mm256_mullo_epi32(g, wg));
        sum = _mm256_add_epi32(sum, _mm256_mullo_epi32(b, wb));
        sum = _mm256_add_epi32(sum, half);
        const __m256i q = div1000_epu32(sum);
        const __m128i p16 = _mm_packus_epi32(_mm256_castsi256_si128(q), _mm256_extracti128_si256(q, 1));
        const __m128i p8 = _mm_packus_epi16(p16, p16);
        _mm_storel_epi64(reinterpret_cast<__m128i*>(gray + i), p8);
    }
    for (; i < pixels; ++i) {
        const std::uint32_t v = 299u * rgb[3 * i] + 587u * rgb[3 * i + 1] + 114u * rgb[3 * i + 2] + 500u;
        gray[i] = static_cast<std::uint8_t>(v / 1000u);
    }
}

double dot_f32(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 va = _mm256_loadu_ps(a + i);
        const __m256 vb = _mm256_loadu_ps(b + i);
        acc0 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                               _mm256_cvtps_pd(_mm256_castps256_ps128(vb)), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                               _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)), acc1);
    }
    double acc = hsum_pd(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += double(a[i]) * double(b[i]);
    return acc;
}

double sq_dist_f32(const float* a, const float* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 va = _mm256_loadu_ps(a + i);
        const __m256 vb = _mm256_loadu_ps(b + i);
        const __m256d d0 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_castps256_ps128(va)),
                                         _mm256_cvtps_pd(_mm256_castps256_ps128(vb)));
        const __m256d d1 = _mm256_sub_pd(_mm256_cvtps_pd(_mm256_extractf128_ps(va, 1)),
                                         _mm256_cvtps_pd(_mm256_extractf128_ps(vb, 1)));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    double acc = hsum_pd(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = double(a[i]) - double(b[i]);
        acc += d * d;
    }
    return acc;
}

void axpy_f64(double* y, const double* x, double alpha, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table{Backend::avx2, sum_sq_diff_u8, luma_u8, dot_f32, sq_dist_f32, axpy_f64};
    return table;
}

}  // namespace vstain::simd::detail
