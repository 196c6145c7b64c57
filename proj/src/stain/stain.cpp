#include "vstain/stain.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vstain/errors.hpp"
#include "vstain/imaging.hpp"

namespace vstain {
namespace {

double det3(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 invert3(const Mat3& m, double det) {
    Mat3 inv{};
    inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / det;
    inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / det;
    inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / det;
    inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / det;
    inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / det;
    inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / det;
    inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / det;
    inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / det;
    inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / det;
    return inv;
}

// Row vector times matrix.
Vec3 mul(const Vec3& v, const Mat3& m) {
    return {v[0] * m[0][0] + v[1] * m[1][0] + v[2] * m[2][0],
            v[0] * m[0][1] + v[1] * m[1][1] + v[2] * m[2][1],
            v[0] * m[0][2] + v[1] * m[1][2] + v[2] * m[2][2]};
}

const std::array<double, 256>& od_table() {
    static const std::array<double, 256> table = [] {
        std::array<double, 256> t{};
        for (int i = 0; i < 256; ++i) t[i] = -std::log10((i + 1) / 256.0);
        return t;
    }();
    return table;
}

}  // namespace

StainBasis::StainBasis(const Mat3& rows) : rows_(rows) {
    for (auto& row : rows_) {
        const double norm = std::sqrt(row[0] * row[0] + row[1] * row[1] + row[2] * row[2]);
        if (!(norm > 0.0) || !std::isfinite(norm)) {
            throw Error(ErrorCode::SingularBasis, "stain vector has zero or non-finite norm");
        }
        for (double& v : row) v /= norm;
    }
    const double det = det3(rows_);
    if (!(std::abs(det) >= 1e-8)) {
        throw Error(ErrorCode::SingularBasis, "stain matrix determinant " + std::to_string(det) + " below 1e-8");
    }
    inverse_ = invert3(rows_, det);
}

StainBasis StainBasis::from_values(std::span<const double> values) {
    if (values.size() != 9) throw Error(ErrorCode::InvalidArgument, "stain basis needs exactly 9 values");
    return StainBasis(Mat3{Vec3{values[0], values[1], values[2]}, Vec3{values[3], values[4], values[5]},
                           Vec3{values[6], values[7], values[8]}});
}

StainBasis StainBasis::hed_default() {
    return StainBasis(Mat3{Vec3{0.650, 0.704, 0.286}, Vec3{0.072, 0.990, 0.105}, Vec3{0.268, 0.570, 0.776}});
}

std::array<double, 9> StainBasis::values() const noexcept {
    std::array<double, 9> out{};
    for (std::size_t r = 0; r < 3; ++r) {
        for (std::size_t c = 0; c < 3; ++c) out[r * 3 + c] = rows_[r][c];
    }
    return out;
}

StainImage::StainImage(std::size_t width, std::size_t height) : width_(width), height_(height) {
    if (width == 0 || height == 0) throw Error(ErrorCode::InvalidArgument, "stain image dimensions must be positive");
    data_.assign(width * height, Vec3{0.0, 0.0, 0.0});
}

double optical_density(std::uint8_t intensity) noexcept { return od_table()[intensity]; }

std::uint8_t intensity_from_od(double od) noexcept {
    const double v = std::round(256.0 * std::pow(10.0, -od) - 1.0);
    return static_cast<std::uint8_t>(std::clamp(v, 0.0, 255.0));
}

std::vector<Vec3> rgb_to_od(const ImageTile& img) {
    const auto& table = od_table();
    auto px = img.pixels();
    std::vector<Vec3> out(img.pixel_count());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = {table[px[3 * i]], table[px[3 * i + 1]], table[px[3 * i + 2]]};
    }
    return out;
}

StainImage deconvolve(const ImageTile& img, const StainBasis& basis) {
    const auto& table = od_table();
    const Mat3& inv = basis.inverse();
    StainImage out(img.width(), img.height());
    auto px = img.pixels();
    auto dst = out.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = mul(Vec3{table[px[3 * i]], table[px[3 * i + 1]], table[px[3 * i + 2]]}, inv);
    }
    return out;
}

ImageTile reconstruct(const StainImage& stains, const StainBasis& basis, StainSet keep) {
    const std::array<bool, 3> kept{keep.contains(Stain::hematoxylin), keep.contains(Stain::eosin),
                                   keep.contains(Stain::dab)};
    ImageTile out(stains.width(), stains.height());
    auto px = out.pixels();
    auto src = stains.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        Vec3 c{};
        for (std::size_t s = 0; s < 3; ++s) c[s] = kept[s] ? std::max(src[i][s], 0.0) : 0.0;
        const Vec3 od = mul(c, basis.rows());
        for (std::size_t ch = 0; ch < 3; ++ch) px[3 * i + ch] = intensity_from_od(od[ch]);
    }
    return out;
}

BinaryMask apply_morphology(const BinaryMask& mask, const MorphologySpec& spec) {
    BinaryMask cur = mask;
    for (const MorphStep& step : spec.steps) {
        const auto se = StructuringElement::rectangle(step.width, step.height);
        cur = step.op == MorphOp::dilate ? dilate(cur, se, step.iterations) : erode(cur, se, step.iterations);
    }
    return cur;
}

BinaryMask dab_threshold_mask(const StainImage& stains, double dab_threshold) {
    BinaryMask out(stains.width(), stains.height());
    auto src = stains.data();
    auto bits = out.bits();
    for (std::size_t i = 0; i < src.size(); ++i) bits[i] = std::max(src[i][2], 0.0) > dab_threshold;
    return out;
}

BinaryMask dab_mask(const ImageTile& img, const StainBasis& basis, double dab_threshold,
                    const MorphologySpec& cleanup) {
    if (!(dab_threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "dab_threshold must be positive");
    return apply_morphology(dab_threshold_mask(deconvolve(img, basis), dab_threshold), cleanup);
}

double dab_otsu_threshold(const ImageTile& img, const StainBasis& basis) {
    const StainImage stains = deconvolve(img, basis);
    double peak = 0.0;
    for (const Vec3& c : stains.data()) peak = std::max(peak, c[2]);
    if (!(peak > 0.0)) throw Error(ErrorCode::ConstantImage, "no DAB signal to threshold");
    std::vector<std::uint64_t> hist(256, 0);
    for (const Vec3& c : stains.data()) {
        const double q = std::round(std::max(c[2], 0.0) / peak * 255.0);
        ++hist[static_cast<std::size_t>(q)];
    }
    const int t = otsu_threshold(hist);
    return (t + 0.5) * peak / 255.0;
}

}  // namespace vstain
