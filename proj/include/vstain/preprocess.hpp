#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vstain/image.hpp"
#include "vstain/stain.hpp"

namespace vstain {

struct TissueParams {
    std::size_t min_area = 15000;
    std::size_t morph_size = 20;
    unsigned morph_iterations = 5;
};

/// Bounding boxes of tissue pieces: Otsu on grayscale keeping the darker
/// class, closed with a square footprint, then components ≥ min_area.
/// A uniform image has no tissue and yields an empty list.
std::vector<Box> tissue_boxes(const ImageTile& img, const TissueParams& params = {});

struct AoiParams {
    double dab_threshold = 0.15;
    std::size_t context = 32;
    std::uint8_t tissue_threshold = 127;
    bool tissue_keep_above = true;
    std::size_t morph_size = 20;
    unsigned morph_iterations = 5;
};

struct AoiPair {
    BinaryMask positive;
    BinaryMask negative;
    BinaryMask tissue;
};

/// positive: context×context squares around DAB-positive pixels, inside tissue.
/// tissue: gray threshold, opened with a morph_size square.
/// negative: tissue minus positive.
AoiPair areas_of_interest(const ImageTile& ihc, const StainBasis& basis, const AoiParams& params = {});

enum class Polarity { positive, negative };

std::string to_string(Polarity p);

struct PatchSpec {
    std::size_t x = 0;
    std::size_t y = 0;
    std::size_t size = 0;
    Polarity polarity = Polarity::positive;

    friend bool operator==(const PatchSpec&, const PatchSpec&) = default;
};

/// count_per_class positive then count_per_class negative patches whose
/// center pixel (x + size/2, y + size/2) lies in the matching mask. Origins
/// are distinct within a class. Gives up with InsufficientArea after
/// 10,000·count draws for a class.
std::vector<PatchSpec> sample_patches(const AoiPair& aoi, std::size_t count_per_class, std::size_t size,
                                      std::uint64_t seed);

struct Origin {
    std::size_t x = 0;
    std::size_t y = 0;

    friend bool operator==(const Origin&, const Origin&) = default;
    friend auto operator<=>(const Origin&, const Origin&) = default;
};

/// Origins in raster order (rows of y, then x).
struct TileGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t tile = 0;
    std::size_t overlap = 0;
    std::vector<Origin> origins;

    friend bool operator==(const TileGrid&, const TileGrid&) = default;
};

/// Axis positions 0, s, 2s, … with s = tile − overlap, the last one moved to
/// dim − tile so tiles end flush with the edge.
std::vector<std::size_t> grid_axis(std::size_t dim, std::size_t tile, std::size_t overlap);

TileGrid make_grid(std::size_t width, std::size_t height, std::size_t tile = 256, std::size_t overlap = 192);

/// Checks the grid is self-consistent (origins in bounds, overlap < tile).
void validate_grid(const TileGrid& grid);

struct PlacedTile {
    Origin origin;
    ImageTile tile;
};

std::vector<PlacedTile> extract_tiles(const ImageTile& img, const TileGrid& grid);

enum class Blend { average, feather };

/// Weighted per-pixel blend of the overlapping tiles with integer weights
/// (1 for average, triangular ramps for feather) and round-half-even.
ImageTile stitch(std::span<const PlacedTile> tiles, const TileGrid& grid, Blend blend = Blend::average);

enum class SeamAxis { vertical, horizontal };

struct Seam {
    SeamAxis axis = SeamAxis::vertical;
    std::size_t position = 0;  // first column (row) after the boundary
    double value = 0.0;
};

struct SeamReport {
    std::vector<Seam> seams;
    double max = 0.0;
    double mean = 0.0;
    double baseline_x = 0.0;  // mean |g(x) − g(x−1)| over the whole image
    double baseline_y = 0.0;  // mean |g(y) − g(y−1)| over the whole image
};

/// Mean absolute grayscale step across each interior tile boundary.
SeamReport seam_report(const ImageTile& img, const TileGrid& grid);

}  // namespace vstain
