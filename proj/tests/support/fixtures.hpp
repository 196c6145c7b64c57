#pragma once

// Random inputs shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vstain/distribution.hpp"
#include "vstain/image.hpp"

namespace fixture {

using Rng = std::mt19937_64;

inline int uniform_int(Rng& rng, int lo, int hi) {  // inclusive
    return lo + int(rng() % std::uint64_t(hi - lo + 1));
}

inline double uniform01(Rng& rng) { return double(rng() >> 11) * 0x1.0p-53; }

inline double normal(Rng& rng) {
    // Box–Muller, reproducible across standard libraries
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline vstain::ImageTile random_image(Rng& rng, std::size_t w, std::size_t h) {
    std::vector<std::uint8_t> px(w * h * 3);
    for (auto& v : px) v = std::uint8_t(rng());
    return vstain::ImageTile(w, h, std::move(px));
}

/// Random image plus a smooth blob pattern, so SSIM sees structure.
inline vstain::ImageTile textured_image(Rng& rng, std::size_t w, std::size_t h) {
    vstain::ImageTile img(w, h);
    const double fx = 0.1 + 0.3 * uniform01(rng), fy = 0.1 + 0.3 * uniform01(rng);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double base = 128 + 80 * std::sin(fx * double(x)) * std::cos(fy * double(y));
            auto ch = [&](double off) {
                return std::uint8_t(std::clamp(base + off + uniform_int(rng, -20, 20), 0.0, 255.0));
            };
            img.set(x, y, {ch(10), ch(-5), ch(20)});
        }
    }
    return img;
}

inline vstain::BinaryMask random_mask(Rng& rng, std::size_t w, std::size_t h, double density) {
    vstain::BinaryMask m(w, h);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) m.set(x, y, uniform01(rng) < density);
    }
    return m;
}

inline vstain::FeatureSet gaussian_set(Rng& rng, std::size_t n, std::size_t d, const std::vector<double>& mean,
                                       double scale = 1.0) {
    std::vector<float> data(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) data[i * d + j] = float(mean[j] + scale * normal(rng));
    }
    return vstain::FeatureSet(n, d, std::move(data), "test");
}

inline std::vector<std::vector<double>> rows_of(const vstain::FeatureSet& fs) {
    std::vector<std::vector<double>> out(fs.n());
    for (std::size_t i = 0; i < fs.n(); ++i) out[i].assign(fs.row(i).begin(), fs.row(i).end());
    return out;
}

}  // namespace fixture
