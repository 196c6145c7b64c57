#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vstain {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// 8-bit RGB raster, row-major, interleaved channels.
class ImageTile {
public:
    ImageTile(std::size_t width, std::size_t height, Rgb fill = {});
    ImageTile(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    Rgb at(std::size_t x, std::size_t y) const noexcept {
        const std::uint8_t* p = &pixels_[(y * width_ + x) * 3];
        return {p[0], p[1], p[2]};
    }
    void set(std::size_t x, std::size_t y, Rgb c) noexcept {
        std::uint8_t* p = &pixels_[(y * width_ + x) * 3];
        p[0] = c.r;
        p[1] = c.g;
        p[2] = c.b;
    }

    /// Copy of the rectangle [x, x+w) × [y, y+h); must lie inside the image.
    ImageTile crop(std::size_t x, std::size_t y, std::size_t w, std::size_t h) const;

    friend bool operator==(const ImageTile&, const ImageTile&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> pixels_;
};

class GrayImage {
public:
    GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);
    GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    std::uint8_t at(std::size_t x, std::size_t y) const noexcept { return pixels_[y * width_ + x]; }
    void set(std::size_t x, std::size_t y, std::uint8_t v) noexcept { pixels_[y * width_ + x] = v; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> pixels_;
};

/// Boolean raster; one byte per pixel holding 0 or 1.
class BinaryMask {
public:
    BinaryMask(std::size_t width, std::size_t height, bool fill = false);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return width_ * height_; }

    bool at(std::size_t x, std::size_t y) const noexcept { return bits_[y * width_ + x] != 0; }
    void set(std::size_t x, std::size_t y, bool v) noexcept { bits_[y * width_ + x] = v ? 1 : 0; }

    std::span<const std::uint8_t> bits() const noexcept { return bits_; }
    std::span<std::uint8_t> bits() noexcept { return bits_; }

    std::size_t count() const noexcept;
    bool empty_set() const noexcept { return count() == 0; }

    BinaryMask complement() const;
    BinaryMask crop(std::size_t x, std::size_t y, std::size_t w, std::size_t h) const;

    /// true iff every positive pixel of this mask is positive in `other`.
    bool subset_of(const BinaryMask& other) const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> bits_;
};

/// Footprint for morphology. Offsets are measured relative to the anchor,
/// whose own bit must be set.
class StructuringElement {
public:
    StructuringElement(std::size_t width, std::size_t height, std::size_t anchor_row,
                       std::size_t anchor_col, std::vector<std::uint8_t> bits);

    /// Full rectangle anchored at (height/2, width/2).
    static StructuringElement rectangle(std::size_t width, std::size_t height);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t anchor_row() const noexcept { return anchor_row_; }
    std::size_t anchor_col() const noexcept { return anchor_col_; }
    bool at(std::size_t row, std::size_t col) const noexcept { return bits_[row * width_ + col] != 0; }
    bool is_full_rectangle() const noexcept;

private:
    std::size_t width_;
    std::size_t height_;
    std::size_t anchor_row_;
    std::size_t anchor_col_;
    std::vector<std::uint8_t> bits_;
};

struct Box {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t w = 0;
    std::size_t h = 0;

    friend bool operator==(const Box&, const Box&) = default;
};

struct Component {
    Box box;
    std::size_t area = 0;
};

}  // namespace vstain
