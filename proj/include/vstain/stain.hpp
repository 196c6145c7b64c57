#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "vstain/image.hpp"

namespace vstain {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// Optical-density stain matrix; rows are hematoxylin, eosin, DAB.
/// Rows are normalized on construction.
class StainBasis {
public:
    explicit StainBasis(const Mat3& rows);
    /// Nine reals, row-major.
    static StainBasis from_values(std::span<const double> values);
    /// Ruifrok–Johnston H / E / DAB vectors.
    static StainBasis hed_default();

    const Mat3& rows() const noexcept { return rows_; }
    const Mat3& inverse() const noexcept { return inverse_; }
    std::array<double, 9> values() const noexcept;

private:
    Mat3 rows_;
    Mat3 inverse_;
};

enum class Stain : std::uint8_t { hematoxylin = 1, eosin = 2, dab = 4 };

class StainSet {
public:
    constexpr StainSet() = default;
    constexpr StainSet(std::initializer_list<Stain> stains) {
        for (Stain s : stains) bits_ |= std::uint8_t(s);
    }
    static constexpr StainSet all() { return {Stain::hematoxylin, Stain::eosin, Stain::dab}; }
    constexpr bool contains(Stain s) const { return (bits_ & std::uint8_t(s)) != 0; }

private:
    std::uint8_t bits_ = 0;
};

/// Per-pixel (h, e, dab) concentrations, unclamped.
class StainImage {
public:
    StainImage(std::size_t width, std::size_t height);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    const Vec3& at(std::size_t x, std::size_t y) const noexcept { return data_[y * width_ + x]; }
    Vec3& at(std::size_t x, std::size_t y) noexcept { return data_[y * width_ + x]; }
    std::span<const Vec3> data() const noexcept { return data_; }
    std::span<Vec3> data() noexcept { return data_; }

private:
    std::size_t width_;
    std::size_t height_;
    std::vector<Vec3> data_;
};

/// −log10((I + 1) / 256)
double optical_density(std::uint8_t intensity) noexcept;

/// Inverse of optical_density before quantization: clamp(round(256·10^−od − 1), 0, 255).
std::uint8_t intensity_from_od(double od) noexcept;

std::vector<Vec3> rgb_to_od(const ImageTile& img);

StainImage deconvolve(const ImageTile& img, const StainBasis& basis);

/// Negative concentrations are clamped to zero before mixing.
ImageTile reconstruct(const StainImage& stains, const StainBasis& basis, StainSet keep);

enum class MorphOp { dilate, erode };

struct MorphStep {
    MorphOp op = MorphOp::dilate;
    std::size_t width = 3;
    std::size_t height = 3;
    unsigned iterations = 1;
};

/// Ordered morphology steps with full rectangular footprints.
struct MorphologySpec {
    std::vector<MorphStep> steps{MorphStep{}};

    static MorphologySpec none() { return MorphologySpec{{}}; }
};

BinaryMask apply_morphology(const BinaryMask& mask, const MorphologySpec& spec);

/// Pixels whose (clamped) DAB concentration exceeds the threshold, no cleanup.
BinaryMask dab_threshold_mask(const StainImage& stains, double dab_threshold);

BinaryMask dab_mask(const ImageTile& img, const StainBasis& basis, double dab_threshold,
                    const MorphologySpec& cleanup = {});

/// Otsu on the DAB channel rescaled to 0..255; an opt-in heuristic for
/// picking a threshold when no calibrated value exists.
double dab_otsu_threshold(const ImageTile& img, const StainBasis& basis);

}  // namespace vstain
