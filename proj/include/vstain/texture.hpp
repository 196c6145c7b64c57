#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "vstain/image.hpp"

namespace vstain {

/// Returned by psnr() when the images are identical.
inline constexpr double kPsnrIdentical = std::numeric_limits<double>::infinity();

enum class WindowKind { uniform, gaussian };

struct SsimParams {
    std::size_t window = 11;
    WindowKind kind = WindowKind::gaussian;
    double sigma = 1.5;
    double c1 = (0.01 * 255) * (0.01 * 255);
    double c2 = (0.03 * 255) * (0.03 * 255);

    void validate() const;
};

struct TextureScore {
    double mse = 0.0;
    double psnr = kPsnrIdentical;
    double ssim = 1.0;
};

/// Mean squared difference per channel: Σ over pixels and RGB channels / (3·w·h).
double mse(const ImageTile& real, const ImageTile& virt);

/// 10·log10(255² / mse); kPsnrIdentical when mse is zero.
double psnr(const ImageTile& real, const ImageTile& virt);
double psnr_from_mse(double mse) noexcept;

/// Mean SSIM over valid window positions of the grayscale images.
double ssim(const ImageTile& real, const ImageTile& virt, const SsimParams& params = {});

/// Normalized 1-D window taps; the 2-D window is their outer product.
std::vector<double> ssim_window_taps(const SsimParams& params);

TextureScore score_texture(const ImageTile& real, const ImageTile& virt, const SsimParams& params = {});

}  // namespace vstain
