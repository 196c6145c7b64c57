#pragma once

// Data-parallel inner loops with a scalar reference and vectorized variants.
// The active table is chosen once at startup from CPU features; setting the
// environment variable VSTAIN_SIMD=scalar forces the reference path.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace vstain::simd {

enum class Backend { scalar, avx2, neon };

std::string_view to_string(Backend b) noexcept;

struct KernelTable {
    Backend backend;

    // Σ (a[i] − b[i])², exact.
    std::uint64_t (*sum_sq_diff_u8)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);

    // gray[i] = round(0.299·R + 0.587·G + 0.114·B) over interleaved RGB, exact.
    void (*luma_u8)(const std::uint8_t* rgb, std::uint8_t* gray, std::size_t pixels);

    // Accumulated in double.
    double (*dot_f32)(const float* a, const float* b, std::size_t n);
    double (*sq_dist_f32)(const float* a, const float* b, std::size_t n);

    // y[i] += alpha · x[i]
    void (*axpy_f64)(double* y, const double* x, double alpha, std::size_t n);
};

/// The table in use by the library.
const KernelTable& active();

/// The table for a specific backend, or nullptr when this CPU/build lacks it.
const KernelTable* table_for(Backend b);

/// Every backend usable on this machine, scalar first.
std::vector<Backend> available_backends();

namespace detail {
const KernelTable& scalar_table();
#if defined(VSTAIN_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(VSTAIN_HAVE_NEON)
const KernelTable& neon_table();
#endif
}  // namespace detail

}  // namespace vstain::simd
