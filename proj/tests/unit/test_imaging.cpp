#include <algorithm>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "vstain/errors.hpp"
#include "vstain/imaging.hpp"

using namespace vstain;

namespace {

// Minkowski operations written per pixel: dilation reads m(q − v), erosion
// reads m(q + v), outside pixels count as false / true respectively.
BinaryMask brute_morph(const BinaryMask& m, const StructuringElement& se, bool dilation) {
    const int W = int(m.width()), H = int(m.height());
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < H; ++y) {
        for (int x = 0; x < W; ++x) {
            bool acc = !dilation;
            for (int r = 0; r < int(se.height()); ++r) {
                for (int c = 0; c < int(se.width()); ++c) {
                    if (!se.at(std::size_t(r), std::size_t(c))) continue;
                    const int vy = r - int(se.anchor_row()), vx = c - int(se.anchor_col());
                    const int sx = dilation ? x - vx : x + vx;
                    const int sy = dilation ? y - vy : y + vy;
                    const bool inside = sx >= 0 && sy >= 0 && sx < W && sy < H;
                    const bool v = inside ? m.at(std::size_t(sx), std::size_t(sy)) : !dilation;
                    acc = dilation ? (acc || v) : (acc && v);
                }
            }
            out.set(std::size_t(x), std::size_t(y), acc);
        }
    }
    return out;
}

StructuringElement random_se(fixture::Rng& rng) {
    const std::size_t w = std::size_t(fixture::uniform_int(rng, 1, 5));
    const std::size_t h = std::size_t(fixture::uniform_int(rng, 1, 5));
    const std::size_t ar = std::size_t(fixture::uniform_int(rng, 0, int(h) - 1));
    const std::size_t ac = std::size_t(fixture::uniform_int(rng, 0, int(w) - 1));
    std::vector<std::uint8_t> bits(w * h);
    for (auto& b : bits) b = fixture::uniform01(rng) < 0.6;
    bits[ar * w + ac] = 1;
    return StructuringElement(w, h, ar, ac, bits);
}

}  // namespace

TEST_CASE("grayscale conversion") {
    CHECK(to_grayscale(ImageTile(4, 3, Rgb{0, 0, 0})) == GrayImage(4, 3, 0));
    CHECK(to_grayscale(ImageTile(4, 3, Rgb{255, 255, 255})) == GrayImage(4, 3, 255));
    CHECK(to_grayscale(ImageTile(1, 1, Rgb{255, 0, 0})).at(0, 0) == 76);
}

TEST_CASE("otsu fixtures") {
    std::vector<std::uint8_t> px(16, 0);
    std::fill(px.begin() + 8, px.end(), 255);
    CHECK(otsu_threshold(GrayImage(4, 4, px)) == 0);

    std::vector<std::uint8_t> bimodal(200, 10);
    std::fill(bimodal.begin() + 100, bimodal.end(), 200);
    const int t = otsu_threshold(GrayImage(20, 10, bimodal));
    CHECK(t >= 10);
    CHECK(t < 200);

    try {
        otsu_threshold(GrayImage(3, 3, 42));
        FAIL("expected ConstantImage");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConstantImage);
    }
}

TEST_CASE("otsu equals exhaustive search on random images") {
    fixture::Rng rng(101);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t w = std::size_t(fixture::uniform_int(rng, 1, 24));
        const std::size_t h = std::size_t(fixture::uniform_int(rng, 1, 24));
        const int levels = fixture::uniform_int(rng, 2, 256);
        std::vector<std::uint8_t> px(w * h);
        for (auto& v : px) v = std::uint8_t(fixture::uniform_int(rng, 0, levels - 1));
        const int expect = oracle::otsu(px);
        if (expect < 0) {
            CHECK_THROWS_AS(otsu_threshold(GrayImage(w, h, px)), Error);
        } else {
            CHECK(otsu_threshold(GrayImage(w, h, px)) == expect);
        }
    }
}

TEST_CASE("threshold mask uses strict inequality for keep_above") {
    CHECK(threshold_mask(GrayImage(3, 2, 255), 127, true).count() == 6);
    CHECK(threshold_mask(GrayImage(3, 2, 0), 127, true).count() == 0);
    const auto m = threshold_mask(GrayImage(3, 1, std::vector<std::uint8_t>{100, 127, 128}), 127, true);
    CHECK(!m.at(0, 0));
    CHECK(!m.at(1, 0));
    CHECK(m.at(2, 0));
    const auto below = threshold_mask(GrayImage(3, 1, std::vector<std::uint8_t>{100, 127, 128}), 127, false);
    CHECK(below.at(0, 0));
    CHECK(below.at(1, 0));
    CHECK(!below.at(2, 0));
}

TEST_CASE("morphology fixtures") {
    fixture::Rng rng(1);
    const auto m = fixture::random_mask(rng, 9, 7, 0.3);
    const auto se = StructuringElement::rectangle(3, 3);
    CHECK(dilate(m, se, 0) == m);
    CHECK(erode(m, se, 0) == m);

    BinaryMask dot(7, 7);
    dot.set(3, 3, true);
    const auto block = dilate(dot, se);
    CHECK(block.count() == 9);
    for (std::size_t y = 2; y <= 4; ++y) {
        for (std::size_t x = 2; x <= 4; ++x) CHECK(block.at(x, y));
    }
    BinaryMask corner(5, 5);
    corner.set(0, 0, true);
    CHECK(dilate(corner, se).count() == 4);  // clipped at the border
}

TEST_CASE("structuring elements need their anchor bit") {
    CHECK_THROWS_AS(StructuringElement(3, 1, 0, 1, {1, 0, 1}), Error);
    CHECK_THROWS_AS(StructuringElement(3, 1, 0, 3, {1, 1, 1}), Error);
    const auto r = StructuringElement::rectangle(32, 32);
    CHECK(r.anchor_row() == 16);
    CHECK(r.anchor_col() == 16);
}

TEST_CASE("dilation and erosion match the per-pixel definition") {
    fixture::Rng rng(17);
    for (int trial = 0; trial < 300; ++trial) {
        const auto m = fixture::random_mask(rng, std::size_t(fixture::uniform_int(rng, 1, 16)),
                                           std::size_t(fixture::uniform_int(rng, 1, 16)), fixture::uniform01(rng));
        const auto se = trial % 3 == 0
                            ? StructuringElement::rectangle(std::size_t(fixture::uniform_int(rng, 1, 6)),
                                                            std::size_t(fixture::uniform_int(rng, 1, 6)))
                            : random_se(rng);
        const unsigned iters = unsigned(fixture::uniform_int(rng, 1, 3));
        BinaryMask d = m, e = m;
        for (unsigned i = 0; i < iters; ++i) {
            d = brute_morph(d, se, true);
            e = brute_morph(e, se, false);
        }
        CHECK(dilate(m, se, iters) == d);
        CHECK(erode(m, se, iters) == e);
    }
}

TEST_CASE("morphology properties on random masks") {
    fixture::Rng rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        const auto m = fixture::random_mask(rng, 16, 16, fixture::uniform01(rng));
        const auto se = trial % 2 ? StructuringElement::rectangle(3, 3) : random_se(rng);
        CHECK(m.subset_of(dilate(m, se)));
        CHECK(erode(m, se).subset_of(m));
        CHECK(m.subset_of(erode(dilate(m, se), se)));   // closing grows
        CHECK(dilate(erode(m, se), se).subset_of(m));   // opening shrinks

        BinaryMask bigger = m;
        for (auto& b : bigger.bits()) b = b || fixture::uniform01(rng) < 0.1;
        CHECK(dilate(m, se).subset_of(dilate(bigger, se)));
        CHECK(erode(m, se).subset_of(erode(bigger, se)));
    }
}

TEST_CASE("dilation and erosion are complement duals for symmetric elements") {
    fixture::Rng rng(29);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = fixture::random_mask(rng, 20, 18, fixture::uniform01(rng));
        const std::size_t s = std::size_t(2 * fixture::uniform_int(rng, 0, 3) + 1);
        const auto se = StructuringElement::rectangle(s, s);
        const auto lhs = erode(m, se);
        const auto rhs = dilate(m.complement(), se).complement();
        const std::size_t r = s / 2;
        for (std::size_t y = r; y + r < 18; ++y) {
            for (std::size_t x = r; x + r < 20; ++x) CHECK(lhs.at(x, y) == rhs.at(x, y));
        }
    }
}

TEST_CASE("connected components") {
    CHECK(connected_components(BinaryMask(8, 8)).empty());

    BinaryMask two(12, 6);
    for (std::size_t y = 1; y < 5; ++y) {
        for (std::size_t x = 0; x < 4; ++x) two.set(x, y, true);
        for (std::size_t x = 7; x < 11; ++x) two.set(x, y, true);
    }
    const auto cc = connected_components(two);
    REQUIRE(cc.size() == 2);
    CHECK(cc[0].area == 16);
    CHECK(cc[1].area == 16);
    CHECK(cc[0].box == Box{0, 1, 4, 4});
    CHECK(cc[1].box == Box{7, 1, 4, 4});
    CHECK(connected_components(two, 17).empty());

    BinaryMask diag(3, 3);
    diag.set(0, 0, true);
    diag.set(1, 1, true);
    diag.set(2, 2, true);
    CHECK(connected_components(diag).size() == 1);  // 8-connected
}

TEST_CASE("component areas partition the mask") {
    fixture::Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const auto m = fixture::random_mask(rng, 24, 20, fixture::uniform01(rng));
        std::size_t total = 0;
        for (const auto& c : connected_components(m)) {
            total += c.area;
            CHECK(c.box.w >= 1);
            CHECK(c.box.x + c.box.w <= 24);
            CHECK(c.box.y + c.box.h <= 20);
        }
        CHECK(total == m.count());
    }
}
