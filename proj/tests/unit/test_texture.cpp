#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "vstain/errors.hpp"
#include "vstain/texture.hpp"

using namespace vstain;

namespace {

ImageTile offset(const ImageTile& img, int delta) {
    ImageTile out = img;
    for (auto& v : out.pixels()) v = std::uint8_t(std::clamp(int(v) + delta, 0, 255));
    return out;
}

ImageTile noisy(fixture::Rng& rng, const ImageTile& img, int amplitude) {
    ImageTile out = img;
    for (auto& v : out.pixels())
        v = std::uint8_t(std::clamp(int(v) + fixture::uniform_int(rng, -amplitude, amplitude), 0, 255));
    return out;
}

}  // namespace

TEST_CASE("mse and psnr fixtures") {
    fixture::Rng rng(11);
    std::vector<std::uint8_t> px(20 * 20 * 3);
    for (auto& v : px) v = std::uint8_t(fixture::uniform_int(rng, 0, 200));
    const ImageTile a(20, 20, px);
    CHECK(mse(a, a) == 0.0);
    CHECK(std::isinf(psnr(a, a)));
    CHECK(mse(a, offset(a, 16)) == 256.0);
    CHECK(psnr(a, offset(a, 16)) == doctest::Approx(24.0485).epsilon(1e-3 / 24.0485));
    const ImageTile black(7, 3, Rgb{0, 0, 0}), white(7, 3, Rgb{255, 255, 255});
    CHECK(mse(black, white) == 65025.0);
    CHECK(std::abs(psnr(black, white)) < 1e-9);
    CHECK_THROWS_AS(mse(black, ImageTile(3, 7)), Error);
    CHECK_THROWS_AS(psnr(black, ImageTile(3, 7)), Error);
}

TEST_CASE("ssim fixtures") {
    fixture::Rng rng(12);
    const auto a = fixture::textured_image(rng, 32, 32);
    CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-9));

    // negative of content that avoids mid-gray
    std::vector<std::uint8_t> px(32 * 32 * 3);
    for (std::size_t i = 0; i < px.size(); i += 3) {
        const std::uint8_t v = fixture::uniform01(rng) < 0.5 ? std::uint8_t(fixture::uniform_int(rng, 0, 90))
                                                             : std::uint8_t(fixture::uniform_int(rng, 165, 255));
        px[i] = px[i + 1] = px[i + 2] = v;
    }
    const ImageTile r(32, 32, px);
    ImageTile neg = r;
    for (auto& v : neg.pixels()) v = std::uint8_t(255 - v);
    CHECK(ssim(r, neg) < 0.0);
    CHECK(ssim(r, neg) == doctest::Approx(oracle::ssim(r, neg)).epsilon(1e-9));

    double mean = 0;
    for (auto v : a.pixels()) mean += v;
    mean /= double(a.pixels().size());
    const auto m = std::uint8_t(std::lround(mean));
    const double s = ssim(a, ImageTile(32, 32, Rgb{m, m, m}));
    CHECK(s > 0.0);
    CHECK(s < 1.0);

    CHECK_THROWS_AS(ssim(ImageTile(8, 8), ImageTile(8, 8)), Error);
    CHECK_THROWS_AS(ssim(ImageTile(16, 16), ImageTile(16, 15)), Error);
}

TEST_CASE("ssim params validation") {
    SsimParams p;
    p.window = 4;
    CHECK_THROWS_AS(p.validate(), Error);
    p.window = 1;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.c1 = 0;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    p.sigma = -1;
    CHECK_THROWS_AS(p.validate(), Error);
    p = {};
    const auto taps = ssim_window_taps(p);
    REQUIRE(taps.size() == 11);
    double sum = 0;
    for (double t : taps) sum += t;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(taps[5] > taps[0]);
}

TEST_CASE("texture metrics agree with the per-definition oracle") {
    fixture::Rng rng(13);
    for (int t = 0; t < 100; ++t) {
        const auto a = fixture::textured_image(rng, 32, 32);
        const auto b = t % 2 ? fixture::random_image(rng, 32, 32) : noisy(rng, a, 30);
        CHECK(mse(a, b) == doctest::Approx(oracle::mse(a, b)).epsilon(1e-9));
        CHECK(psnr(a, b) == doctest::Approx(oracle::psnr(a, b)).epsilon(1e-9));
        CHECK(std::abs(ssim(a, b) - oracle::ssim(a, b)) < 1e-9);
        SsimParams u;
        u.kind = WindowKind::uniform;
        u.window = 7;
        CHECK(std::abs(ssim(a, b, u) - oracle::ssim(a, b, 7, 0.0, false)) < 1e-9);
    }
}

TEST_CASE("texture metric symmetries") {
    fixture::Rng rng(14);
    for (int t = 0; t < 50; ++t) {
        const auto a = fixture::textured_image(rng, 24, 20);
        const auto b = noisy(rng, a, 60);
        CHECK(mse(a, b) == mse(b, a));
        CHECK(std::abs(ssim(a, b) - ssim(b, a)) < 1e-12);
        CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("psnr decreases along a noise ladder") {
    fixture::Rng rng(15);
    const auto a = fixture::textured_image(rng, 32, 32);
    double last_mse = 0.0, last_psnr = kPsnrIdentical;
    for (int amp = 2; amp <= 64; amp *= 2) {
        const auto b = noisy(rng, a, amp);
        const auto s = score_texture(a, b);
        CHECK(s.mse > last_mse);
        CHECK(s.psnr < last_psnr);
        last_mse = s.mse;
        last_psnr = s.psnr;
    }
    CHECK(psnr_from_mse(0.0) == kPsnrIdentical);
}
