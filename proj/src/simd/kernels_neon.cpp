// aarch64 only; NEON is part of the base ISA there.

#include "vstain/simd/kernels.hpp"

#include <arm_neon.h>

namespace vstain::simd::detail {
namespace {

std::uint64_t sum_sq_diff_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
    uint64x2_t total = vdupq_n_u64(0);
    std::size_t i = 0;
    constexpr std::size_t kFlushEvery = 4096;
    while (i + 16 <= n) {
        uint32x4_t acc32 = vdupq_n_u32(0);
        for (std::size_t step = 0; step < kFlushEvery && i + 16 <= n; ++step, i += 16) {
            const uint8x16_t d = vabdq_u8(vld1q_u8(a + i), vld1q_u8(b + i));
            const uint16x8_t sq_lo = vmull_u8(vget_low_u8(d), vget_low_u8(d));
            const uint16x8_t sq_hi = vmull_u8(vget_high_u8(d), vget_high_u8(d));
            acc32 = vpadalq_u16(acc32, sq_lo);
            acc32 = vpadalq_u16(acc32, sq_hi);
        }
        total = vpadalq_u32(total, acc32);
    }
    std::uint64_t acc = vgetq_lane_u64(total, 0) + vgetq_lane_u64(total, 1);
    for (; i < n; ++i) {
        const int d = int(a[i]) - int(b[i]);
        acc += std::uint64_t(d * d);
    }
    return acc;
}

inline uint32x4_t div1000_u32(uint32x4_t v) {
    const uint32x2_t magic = vdup_n_u32(4294968u);
    const uint64x2_t lo = vmull_u32(vget_low_u32(v), magic);
    const uint64x2_t hi = vmull_u32(vget_high_u32(v), magic);
    return vcombine_u32(vshrn_n_u64(lo, 32), vshrn_n_u64(hi, 32));
}

void luma_u8(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t pixels) {
    std::size_t i = 0;
    for (; i + 8 <= pixels; i += 8) {
        const uint8x8x3_t px = vld3_u8(rgb + 3 * i);
        const uint16x8_t r = vmovl_u8(px.val[0]);
        const uint16x8_t g = vmovl_u8(px.val[1]);
        const uint16x8_t b = vmovl_u8(px.val[2]);
        uint32x4_t lo = vmull_n_u16(vget_low_u16(r), 299);
        lo = vmlal_n_u16(lo, vget_low_u16(g), 587);
        lo = vmlal_n_u16(lo, vget_low_u16(b), 114);
        uint32x4_t hi = vmull_n_u16(vget_high_u16(r), 299);
        hi = vmlal_n_u16(hi, vget_high_u16(g), 587);
        hi = vmlal_n_u16(hi, vget_high_u16(b), 114);
        const uint32x4_t half = vdupq_n_u32(500);
        lo = div1000_u32(vaddq_u32(lo, half));
        hi = div1000_u32(vaddq_u32(hi, half));
        const uint16x8_t q16 = vcombine_u16(vmovn_u32(lo), vmovn_u32(hi));
        vst1_u8(gray + i, vmovn_u16(q16));
    }
    for (; i < pixels; ++i) {
        const std::uint32_t v = 299u * rgb[3 * i] + 587u * rgb[3 * i + 1] + 114u * rgb[3 * i + 2] + 500u;
        gray[i] = static_cast<std::uint8_t>(v / 1000u);
    }
}

double dot_f32(const float* a, const float* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t va = vld1q_f32(a + i);
        const float32x4_t vb = vld1q_f32(b + i);
        acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(va)), vcvt_f64_f32(vget_low_f32(vb)));
        acc1 = vfmaq_f64(acc1, vcvt_high_f64_f32(va), vcvt_high_f64_f32(vb));
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) acc += double(a[i]) * double(b[i]);
    return acc;
}

double sq_dist_f32(const float* a, const float* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t va = vld1q_f32(a + i);
        const float32x4_t vb = vld1q_f32(b + i);
        const float64x2_t d0 = vsubq_f64(vcvt_f64_f32(vget_low_f32(va)), vcvt_f64_f32(vget_low_f32(vb)));
        const float64x2_t d1 = vsubq_f64(vcvt_high_f64_f32(va), vcvt_high_f64_f32(vb));
        acc0 = vfmaq_f64(acc0, d0, d0);
        acc1 = vfmaq_f64(acc1, d1, d1);
    }
    double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
    for (; i < n; ++i) {
        const double d = double(a[i]) - double(b[i]);
        acc += d * d;
    }
    return acc;
}

void axpy_f64(double* y, const double* x, double alpha, std::size_t n) {
    const float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
    for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& neon_table() {
    static const KernelTable table{Backend::neon, sum_sq_diff_u8, luma_u8, dot_f32, sq_dist_f32, axpy_f64};
    return table;
}

}  // namespace vstain::simd::detail
