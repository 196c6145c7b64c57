#include "vstain/image.hpp"

#include <algorithm>
#include <string>

#include "vstain/errors.hpp"

namespace vstain {
namespace {

void check_dims(std::size_t w, std::size_t h) {
    if (w == 0 || h == 0) {
        throw Error(ErrorCode::InvalidArgument,
                    "image dimensions must be positive, got " + std::to_string(w) + "x" + std::to_string(h));
    }
}

void check_crop(std::size_t W, std::size_t H, std::size_t x, std::size_t y, std::size_t w, std::size_t h) {
    check_dims(w, h);
    if (x + w > W || y + h > H) throw Error(ErrorCode::InvalidArgument, "crop rectangle outside image");
}

}  // namespace

ImageTile::ImageTile(std::size_t width, std::size_t height, Rgb fill)
    : width_(width), height_(height) {
    check_dims(width, height);
    pixels_.resize(width * height * 3);
    for (std::size_t i = 0; i < width * height; ++i) {
        pixels_[3 * i] = fill.r;
        pixels_[3 * i + 1] = fill.g;
        pixels_[3 * i + 2] = fill.b;
    }
}

ImageTile::ImageTile(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    check_dims(width, height);
    if (pixels_.size() != width * height * 3) {
        throw Error(ErrorCode::InvalidArgument, "RGB buffer length does not match width*height*3");
    }
}

ImageTile ImageTile::crop(std::size_t x, std::size_t y, std::size_t w, std::size_t h) const {
    check_crop(width_, height_, x, y, w, h);
    std::vector<std::uint8_t> out(w * h * 3);
    for (std::size_t r = 0; r < h; ++r) {
        const auto* src = &pixels_[((y + r) * width_ + x) * 3];
        std::copy(src, src + w * 3, &out[r * w * 3]);
    }
    return ImageTile(w, h, std::move(out));
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height) {
    check_dims(width, height);
    pixels_.assign(width * height, fill);
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    check_dims(width, height);
    if (pixels_.size() != width * height) {
        throw Error(ErrorCode::InvalidArgument, "gray buffer length does not match width*height");
    }
}

BinaryMask::BinaryMask(std::size_t width, std::size_t height, bool fill) : width_(width), height_(height) {
    check_dims(width, height);
    bits_.assign(width * height, fill ? 1 : 0);
}

std::size_t BinaryMask::count() const noexcept {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::complement() const {
    BinaryMask out(width_, height_);
    for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] = bits_[i] ? 0 : 1;
    return out;
}

BinaryMask BinaryMask::crop(std::size_t x, std::size_t y, std::size_t w, std::size_t h) const {
    check_crop(width_, height_, x, y, w, h);
    BinaryMask out(w, h);
    for (std::size_t r = 0; r < h; ++r) {
        const auto* src = &bits_[(y + r) * width_ + x];
        std::copy(src, src + w, &out.bits_[r * w]);
    }
    return out;
}

bool BinaryMask::subset_of(const BinaryMask& other) const {
    if (other.width_ != width_ || other.height_ != height_) {
        throw Error(ErrorCode::DimensionMismatch, "subset_of on masks of different size");
    }
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] && !other.bits_[i]) return false;
    }
    return true;
}

StructuringElement::StructuringElement(std::size_t width, std::size_t height, std::size_t anchor_row,
                                       std::size_t anchor_col, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), anchor_row_(anchor_row), anchor_col_(anchor_col), bits_(std::move(bits)) {
    check_dims(width, height);
    if (bits_.size() != width * height) throw Error(ErrorCode::InvalidArgument, "footprint size mismatch");
    for (auto& b : bits_) b = b ? 1 : 0;
    if (anchor_row >= height || anchor_col >= width) {
        throw Error(ErrorCode::InvalidArgument, "anchor outside footprint bounds");
    }
    if (!bits_[anchor_row * width + anchor_col]) {
        throw Error(ErrorCode::InvalidArgument, "anchor bit must be set");
    }
}

StructuringElement StructuringElement::rectangle(std::size_t width, std::size_t height) {
    return StructuringElement(width, height, height / 2, width / 2,
                              std::vector<std::uint8_t>(width * height, 1));
}

bool StructuringElement::is_full_rectangle() const noexcept {
    return std::all_of(bits_.begin(), bits_.end(), [](std::uint8_t b) { return b != 0; });
}

}  // namespace vstain
