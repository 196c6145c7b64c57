#include "vstain/preprocess.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>

#include "vstain/errors.hpp"
#include "vstain/imaging.hpp"
#include "vstain/rng.hpp"

namespace vstain {

std::vector<Box> tissue_boxes(const ImageTile& img, const TissueParams& params) {
    const GrayImage gray = to_grayscale(img);
    std::uint8_t t;
    try {
        t = otsu_threshold(gray);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConstantImage) return {};
        throw;
    }
    const auto se = StructuringElement::rectangle(params.morph_size, params.morph_size);
    BinaryMask fg = threshold_mask(gray, t, false);
    fg = erode(dilate(fg, se, params.morph_iterations), se, params.morph_iterations);
    std::vector<Box> boxes;
    for (const auto& c : connected_components(fg, params.min_area)) boxes.push_back(c.box);
    return boxes;
}

AoiPair areas_of_interest(const ImageTile& ihc, const StainBasis& basis, const AoiParams& params) {
    if (params.context == 0) throw Error(ErrorCode::InvalidArgument, "context size must be positive");
    const GrayImage gray = to_grayscale(ihc);
    const auto se = StructuringElement::rectangle(params.morph_size, params.morph_size);
    BinaryMask tissue = threshold_mask(gray, params.tissue_threshold, params.tissue_keep_above);
    tissue = dilate(erode(tissue, se, params.morph_iterations), se, params.morph_iterations);

    const BinaryMask dab = dab_threshold_mask(deconvolve(ihc, basis), params.dab_threshold);
    BinaryMask positive = dilate(dab, StructuringElement::rectangle(params.context, params.context));

    BinaryMask negative(ihc.width(), ihc.height());
    auto pos = positive.bits();
    auto neg = negative.bits();
    auto tis = tissue.bits();
    for (std::size_t i = 0; i < pos.size(); ++i) {
        pos[i] = pos[i] && tis[i];
        neg[i] = tis[i] && !pos[i];
    }
    return {std::move(positive), std::move(negative), std::move(tissue)};
}

std::string to_string(Polarity p) { return p == Polarity::positive ? "positive" : "negative"; }

namespace {

void sample_class(const BinaryMask& mask, Polarity polarity, std::size_t count, std::size_t size, Rng& rng,
                  std::vector<PatchSpec>& out) {
    if (count == 0) return;
    const std::size_t W = mask.width();
    const std::size_t H = mask.height();
    if (size > W || size > H) {
        throw Error(ErrorCode::InsufficientArea, "patch size exceeds image for " + to_string(polarity));
    }
    std::set<Origin> seen;
    const std::size_t cap = 10000 * count;
    std::size_t accepted = 0;
    for (std::size_t attempt = 0; attempt < cap && accepted < count; ++attempt) {
        const std::size_t x = uniform_below(rng, W - size + 1);
        const std::size_t y = uniform_below(rng, H - size + 1);
        if (!mask.at(x + size / 2, y + size / 2)) continue;
        if (!seen.insert({x, y}).second) continue;
        out.push_back({x, y, size, polarity});
        ++accepted;
    }
    if (accepted < count) {
        throw Error(ErrorCode::InsufficientArea, "only " + std::to_string(accepted) + " of " +
                                                     std::to_string(count) + " " + to_string(polarity) +
                                                     " patches found");
    }
}

}  // namespace

std::vector<PatchSpec> sample_patches(const AoiPair& aoi, std::size_t count_per_class, std::size_t size,
                                      std::uint64_t seed) {
    if (size == 0) throw Error(ErrorCode::InvalidArgument, "patch size must be positive");
    if (aoi.positive.width() != aoi.negative.width() || aoi.positive.height() != aoi.negative.height()) {
        throw Error(ErrorCode::DimensionMismatch, "AoI masks differ in size");
    }
    Rng rng(seed);
    std::vector<PatchSpec> out;
    out.reserve(2 * count_per_class);
    sample_class(aoi.positive, Polarity::positive, count_per_class, size, rng, out);
    sample_class(aoi.negative, Polarity::negative, count_per_class, size, rng, out);
    return out;
}

std::vector<std::size_t> grid_axis(std::size_t dim, std::size_t tile, std::size_t overlap) {
    if (tile == 0 || overlap >= tile) throw Error(ErrorCode::InvalidArgument, "need 0 <= overlap < tile");
    if (dim < tile) {
        throw Error(ErrorCode::ImageSmallerThanTile,
                    "dimension " + std::to_string(dim) + " < tile " + std::to_string(tile));
    }
    const std::size_t stride = tile - overlap;
    std::vector<std::size_t> pos;
    for (std::size_t p = 0; p + tile < dim; p += stride) pos.push_back(p);
    if (pos.empty() || pos.back() != dim - tile) pos.push_back(dim - tile);
    return pos;
}

TileGrid make_grid(std::size_t width, std::size_t height, std::size_t tile, std::size_t overlap) {
    TileGrid g{width, height, tile, overlap, {}};
    const auto xs = grid_axis(width, tile, overlap);
    const auto ys = grid_axis(height, tile, overlap);
    g.origins.reserve(xs.size() * ys.size());
    for (std::size_t y : ys) {
        for (std::size_t x : xs) g.origins.push_back({x, y});
    }
    return g;
}

void validate_grid(const TileGrid& grid) {
    if (grid.tile == 0 || grid.overlap >= grid.tile) throw Error(ErrorCode::InvalidArgument, "need 0 <= overlap < tile");
    if (grid.width < grid.tile || grid.height < grid.tile) {
        throw Error(ErrorCode::ImageSmallerThanTile, "grid image smaller than tile");
    }
    if (grid.origins.empty()) throw Error(ErrorCode::InvalidArgument, "grid has no origins");
    for (const auto& o : grid.origins) {
        if (o.x + grid.tile > grid.width || o.y + grid.tile > grid.height) {
            throw Error(ErrorCode::InvalidArgument,
                        "origin (" + std::to_string(o.x) + "," + std::to_string(o.y) + ") out of bounds");
        }
    }
}

std::vector<PlacedTile> extract_tiles(const ImageTile& img, const TileGrid& grid) {
    validate_grid(grid);
    if (img.width() != grid.width || img.height() != grid.height) {
        throw Error(ErrorCode::SizeMismatch, "image does not match grid dimensions");
    }
    std::vector<PlacedTile> out;
    out.reserve(grid.origins.size());
    for (const auto& o : grid.origins) out.push_back({o, img.crop(o.x, o.y, grid.tile, grid.tile)});
    return out;
}

namespace {

std::uint64_t div_round_half_even(std::uint64_t num, std::uint64_t den) {
    const std::uint64_t q = num / den;
    const std::uint64_t r2 = 2 * (num % den);
    if (r2 > den || (r2 == den && (q & 1))) return q + 1;
    return q;
}

}  // namespace

ImageTile stitch(std::span<const PlacedTile> tiles, const TileGrid& grid, Blend blend) {
    validate_grid(grid);
    std::map<Origin, const ImageTile*> by_origin;
    for (const auto& t : tiles) {
        if (t.tile.width() != grid.tile || t.tile.height() != grid.tile) {
            throw Error(ErrorCode::SizeMismatch, "tile at (" + std::to_string(t.origin.x) + "," +
                                                     std::to_string(t.origin.y) + ") is " +
                                                     std::to_string(t.tile.width()) + "x" +
                                                     std::to_string(t.tile.height()));
        }
        if (!by_origin.emplace(t.origin, &t.tile).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate tile at (" + std::to_string(t.origin.x) + "," +
                                                        std::to_string(t.origin.y) + ")");
        }
    }
    std::vector<Origin> missing;
    for (const auto& o : grid.origins) {
        if (!by_origin.contains(o)) missing.push_back(o);
    }
    if (!missing.empty()) {
        std::string msg = "missing tiles:";
        for (const auto& o : missing) msg += " (" + std::to_string(o.x) + "," + std::to_string(o.y) + ")";
        throw Error(ErrorCode::MissingTile, msg);
    }
    if (by_origin.size() != grid.origins.size()) {
        throw Error(ErrorCode::InvalidArgument, "tiles present that are not in the grid");
    }

    const std::size_t T = grid.tile;
    std::vector<std::uint64_t> ramp(T, 1);
    if (blend == Blend::feather) {
        for (std::size_t i = 0; i < T; ++i) ramp[i] = std::min(i + 1, T - i);
    }

    const std::size_t W = grid.width;
    std::vector<std::uint64_t> acc(W * grid.height * 3, 0);
    std::vector<std::uint64_t> weight(W * grid.height, 0);
    for (const auto& o : grid.origins) {
        const auto px = by_origin.at(o)->pixels();
        for (std::size_t ty = 0; ty < T; ++ty) {
            for (std::size_t tx = 0; tx < T; ++tx) {
                const std::uint64_t w = ramp[tx] * ramp[ty];
                const std::size_t dst = (o.y + ty) * W + (o.x + tx);
                const std::size_t src = (ty * T + tx) * 3;
                weight[dst] += w;
                for (std::size_t c = 0; c < 3; ++c) acc[dst * 3 + c] += w * px[src + c];
            }
        }
    }

    ImageTile out(W, grid.height);
    auto dst = out.pixels();
    for (std::size_t i = 0; i < weight.size(); ++i) {
        if (weight[i] == 0) throw Error(ErrorCode::InvalidArgument, "grid does not cover the image");
        for (std::size_t c = 0; c < 3; ++c) {
            dst[i * 3 + c] = std::uint8_t(div_round_half_even(acc[i * 3 + c], weight[i]));
        }
    }
    return out;
}

SeamReport seam_report(const ImageTile& img, const TileGrid& grid) {
    const GrayImage g = to_grayscale(img);
    const std::size_t W = g.width();
    const std::size_t H = g.height();

    std::set<std::size_t> xs;
    std::set<std::size_t> ys;
    for (const auto& o : grid.origins) {
        if (o.x > 0 && o.x < W) xs.insert(o.x);
        if (o.x + grid.tile < W) xs.insert(o.x + grid.tile);
        if (o.y > 0 && o.y < H) ys.insert(o.y);
        if (o.y + grid.tile < H) ys.insert(o.y + grid.tile);
    }

    auto step = [&](std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) {
        return double(std::abs(int(g.at(x1, y1)) - int(g.at(x0, y0))));
    };

    SeamReport r;
    for (std::size_t x : xs) {
        double sum = 0.0;
        for (std::size_t y = 0; y < H; ++y) sum += step(x - 1, y, x, y);
        r.seams.push_back({SeamAxis::vertical, x, sum / double(H)});
    }
    for (std::size_t y : ys) {
        double sum = 0.0;
        for (std::size_t x = 0; x < W; ++x) sum += step(x, y - 1, x, y);
        r.seams.push_back({SeamAxis::horizontal, y, sum / double(W)});
    }
    for (const auto& s : r.seams) {
        r.max = std::max(r.max, s.value);
        r.mean += s.value;
    }
    if (!r.seams.empty()) r.mean /= double(r.seams.size());

    if (W > 1) {
        double sum = 0.0;
        for (std::size_t y = 0; y < H; ++y) {
            for (std::size_t x = 1; x < W; ++x) sum += step(x - 1, y, x, y);
        }
        r.baseline_x = sum / double((W - 1) * H);
    }
    if (H > 1) {
        double sum = 0.0;
        for (std::size_t y = 1; y < H; ++y) {
            for (std::size_t x = 0; x < W; ++x) sum += step(x, y - 1, x, y);
        }
        r.baseline_y = sum / double(W * (H - 1));
    }
    return r;
}

}  // namespace vstain
