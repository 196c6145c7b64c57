#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "vstain/errors.hpp"
#include "vstain/image_io.hpp"

using namespace vstain;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path p = fs::temp_directory_path() / ("vstain_io_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("image round trips are bit-exact") {
    const auto dir = temp_dir();
    fixture::Rng rng(2);
    for (const char* ext : {".png", ".tif", ".tiff"}) {
        for (int i = 0; i < 5; ++i) {
            const auto img = fixture::random_image(rng, std::size_t(fixture::uniform_int(rng, 1, 40)),
                                                   std::size_t(fixture::uniform_int(rng, 1, 40)));
            const auto path = dir / (std::string("img") + std::to_string(i) + ext);
            write_image(path, img);
            CHECK(read_image(path) == img);
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("1x1 black PNG reads as zeros") {
    const auto dir = temp_dir();
    write_image(dir / "black.png", ImageTile(1, 1, Rgb{0, 0, 0}));
    const auto img = read_image(dir / "black.png");
    CHECK(img.width() == 1);
    CHECK(img.at(0, 0) == Rgb{0, 0, 0});
    fs::remove_all(dir);
}

TEST_CASE("mask and gray round trips") {
    const auto dir = temp_dir();
    fixture::Rng rng(4);
    for (const char* ext : {".png", ".tif"}) {
        const auto m = fixture::random_mask(rng, 33, 17, 0.4);
        write_mask(dir / (std::string("m") + ext), m);
        CHECK(read_mask(dir / (std::string("m") + ext)) == m);

        std::vector<std::uint8_t> px(21 * 9);
        for (auto& v : px) v = std::uint8_t(rng());
        const GrayImage g(21, 9, px);
        write_gray(dir / (std::string("g") + ext), g);
        CHECK(read_gray(dir / (std::string("g") + ext)) == g);
        // a gray file read as colour replicates the channel
        const auto rgb = read_image(dir / (std::string("g") + ext));
        CHECK(rgb.at(3, 4) == Rgb{g.at(3, 4), g.at(3, 4), g.at(3, 4)});
    }
    fs::remove_all(dir);
}

TEST_CASE("io errors") {
    const auto dir = temp_dir();
    CHECK_THROWS_AS(read_image(dir / "nope.png"), Error);
    try {
        read_image(dir / "nope.png");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
    {
        std::ofstream f(dir / "junk.png", std::ios::binary);
        f << "definitely not an image";
    }
    try {
        read_image(dir / "junk.png");
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedFormat);
    }
    try {
        write_image(dir / "x.bmp", ImageTile(2, 2));
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnsupportedFormat);
    }
    fs::remove_all(dir);
}
