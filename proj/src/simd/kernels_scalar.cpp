#include "vstain/simd/kernels.hpp"

namespace vstain::simd::detail {
namespace {

std::uint64_t sum_sq_diff_u8(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const int d = int(a[i]) - int(b[i]);
        acc += std::uint64_t(d * d);
    }
    return acc;
}

void luma_u8(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t pixels) {
    for (std::size_t i = 0; i < pixels; ++i) {
        const std::uint32_t v = 299u * rgb[3 * i] + 587u * rgb[3 * i + 1] + 114u * rgb[3 * i + 2] + 500u;
        gray[i] = static_cast<std::uint8_t>(v / 1000u);
    }
}

double dot_f32(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += double(a[i]) * double(b[i]);
    return acc;
}

double sq_dist_f32(const float* a, const float* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = double(a[i]) - double(b[i]);
        acc += d * d;
    }
    return acc;
}

void axpy_f64(double* y, const double* x, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table{Backend::scalar, sum_sq_diff_u8, luma_u8, dot_f32, sq_dist_f32, axpy_f64};
    return table;
}

}  // namespace vstain::simd::detail
