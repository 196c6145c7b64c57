#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "vstain/image.hpp"

namespace vstain {

/// Luma with weights 0.299/0.587/0.114, rounded half up; computed exactly in
/// integer arithmetic.
GrayImage to_grayscale(const ImageTile& img);

/// Threshold t maximizing between-class variance of {≤ t} vs {> t}; the
/// smallest maximizer wins ties. Throws ConstantImage when every pixel is equal.
std::uint8_t otsu_threshold(const GrayImage& img);

/// Same search over a 256-bin histogram.
std::uint8_t otsu_threshold(const std::vector<std::uint64_t>& histogram);

BinaryMask threshold_mask(const GrayImage& img, std::uint8_t t, bool keep_above);

// Minkowski dilation/erosion by the footprint offsets (bit − anchor).
// Dilation treats out-of-bounds pixels as background. Erosion treats them as
// foreground, so the image border never erodes a region on its own.
BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se, unsigned iterations = 1);
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se, unsigned iterations = 1);

/// 8-connected components with area ≥ min_area, sorted by (y, x) of their
/// bounding box, then by raster order of first pixel.
std::vector<Component> connected_components(const BinaryMask& mask, std::size_t min_area = 0);

}  // namespace vstain
