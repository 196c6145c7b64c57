#include "vstain/imaging.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>

#include "vstain/errors.hpp"
#include "vstain/simd/kernels.hpp"

namespace vstain {

GrayImage to_grayscale(const ImageTile& img) {
    GrayImage out(img.width(), img.height());
    simd::active().luma_u8(img.pixels().data(), out.pixels().data(), img.pixel_count());
    return out;
}

std::uint8_t otsu_threshold(const std::vector<std::uint64_t>& histogram) {
    using boost::multiprecision::int256_t;
    if (histogram.size() != 256) throw Error(ErrorCode::InvalidArgument, "histogram must have 256 bins");

    std::uint64_t total = 0;
    std::uint64_t total_sum = 0;
    std::size_t occupied = 0;
    for (std::size_t v = 0; v < 256; ++v) {
        total += histogram[v];
        total_sum += histogram[v] * v;
        occupied += histogram[v] ? 1 : 0;
    }
    if (total == 0) throw Error(ErrorCode::InvalidArgument, "empty histogram");
    if (occupied < 2) throw Error(ErrorCode::ConstantImage, "all pixels share one value");

    // Between-class variance at split t is proportional to
    //   (S0·N − S·n0)² / (n0·n1),
    // compared as exact cross products so ties resolve deterministically.
    int256_t best_num = 0;
    int256_t best_den = 1;
    int best_t = -1;
    std::uint64_t n0 = 0;
    std::uint64_t s0 = 0;
    for (int t = 0; t < 255; ++t) {
        n0 += histogram[t];
        s0 += histogram[t] * std::uint64_t(t);
        const std::uint64_t n1 = total - n0;
        if (n0 == 0 || n1 == 0) continue;
        const int256_t diff = int256_t(s0) * total - int256_t(total_sum) * n0;
        const int256_t num = diff * diff;
        const int256_t den = int256_t(n0) * n1;
        if (best_t < 0 || num * best_den > best_num * den) {
            best_num = num;
            best_den = den;
            best_t = t;
        }
    }
    return static_cast<std::uint8_t>(best_t);
}

std::uint8_t otsu_threshold(const GrayImage& img) {
    std::vector<std::uint64_t> hist(256, 0);
    for (std::uint8_t v : img.pixels()) ++hist[v];
    return otsu_threshold(hist);
}

BinaryMask threshold_mask(const GrayImage& img, std::uint8_t t, bool keep_above) {
    BinaryMask out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.bits();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = keep_above ? (src[i] > t) : (src[i] <= t);
    }
    return out;
}

namespace {

// For each output index i, `window[i]` = 1 iff the source run [i − before, i + after]
// (clipped to the line) has any set bit (want_any) or has no clear bit (!want_any).
void sliding_line(const std::uint8_t* src, std::size_t stride, std::size_t len, std::ptrdiff_t before,
                  std::ptrdiff_t after, bool want_any, std::uint8_t* dst, std::size_t dst_stride,
                  std::vector<std::uint32_t>& prefix) {
    prefix.assign(len + 1, 0);
    for (std::size_t i = 0; i < len; ++i) {
        const bool hit = want_any ? src[i * stride] != 0 : src[i * stride] == 0;
        prefix[i + 1] = prefix[i] + (hit ? 1 : 0);
    }
    const auto n = static_cast<std::ptrdiff_t>(len);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::clamp<std::ptrdiff_t>(i - before, 0, n);
        const std::ptrdiff_t hi = std::clamp<std::ptrdiff_t>(i + after + 1, 0, n);
        const std::uint32_t hits = hi > lo ? prefix[hi] - prefix[lo] : 0;
        dst[i * dst_stride] = want_any ? (hits > 0) : (hits == 0);
    }
}

// Rectangle fast path, separable into a row pass and a column pass.
BinaryMask morph_rect(const BinaryMask& mask, const StructuringElement& se, bool dilation) {
    const std::size_t W = mask.width();
    const std::size_t H = mask.height();
    const auto ac = static_cast<std::ptrdiff_t>(se.anchor_col());
    const auto ar = static_cast<std::ptrdiff_t>(se.anchor_row());
    const auto sw = static_cast<std::ptrdiff_t>(se.width());
    const auto sh = static_cast<std::ptrdiff_t>(se.height());
    // Dilation reads m(q − v) for v ∈ [−a, size−1−a]; erosion reads m(q + v).
    const std::ptrdiff_t bx = dilation ? sw - 1 - ac : ac;
    const std::ptrdiff_t ax = dilation ? ac : sw - 1 - ac;
    const std::ptrdiff_t by = dilation ? sh - 1 - ar : ar;
    const std::ptrdiff_t ay = dilation ? ar : sh - 1 - ar;

    BinaryMask tmp(W, H);
    BinaryMask out(W, H);
    std::vector<std::uint32_t> prefix;
    for (std::size_t y = 0; y < H; ++y) {
        sliding_line(mask.bits().data() + y * W, 1, W, bx, ax, dilation, tmp.bits().data() + y * W, 1, prefix);
    }
    for (std::size_t x = 0; x < W; ++x) {
        sliding_line(tmp.bits().data() + x, W, H, by, ay, dilation, out.bits().data() + x, W, prefix);
    }
    return out;
}

BinaryMask morph_general(const BinaryMask& mask, const StructuringElement& se, bool dilation) {
    const auto W = static_cast<std::ptrdiff_t>(mask.width());
    const auto H = static_cast<std::ptrdiff_t>(mask.height());
    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> offsets;
    for (std::size_t r = 0; r < se.height(); ++r) {
        for (std::size_t c = 0; c < se.width(); ++c) {
            if (!se.at(r, c)) continue;
            const auto dx = static_cast<std::ptrdiff_t>(c) - static_cast<std::ptrdiff_t>(se.anchor_col());
            const auto dy = static_cast<std::ptrdiff_t>(r) - static_cast<std::ptrdiff_t>(se.anchor_row());
            offsets.emplace_back(dilation ? -dx : dx, dilation ? -dy : dy);
        }
    }
    BinaryMask out(mask.width(), mask.height());
    for (std::ptrdiff_t y = 0; y < H; ++y) {
        for (std::ptrdiff_t x = 0; x < W; ++x) {
            bool value = !dilation;
            for (auto [dx, dy] : offsets) {
                const std::ptrdiff_t sx = x + dx;
                const std::ptrdiff_t sy = y + dy;
                if (sx < 0 || sy < 0 || sx >= W || sy >= H) continue;
                const bool bit = mask.at(std::size_t(sx), std::size_t(sy));
                if (dilation && bit) {
                    value = true;
                    break;
                }
                if (!dilation && !bit) {
                    value = false;
                    break;
                }
            }
            out.set(std::size_t(x), std::size_t(y), value);
        }
    }
    return out;
}

BinaryMask morph(const BinaryMask& mask, const StructuringElement& se, unsigned iterations, bool dilation) {
    BinaryMask cur = mask;
    for (unsigned i = 0; i < iterations; ++i) {
        cur = se.is_full_rectangle() ? morph_rect(cur, se, dilation) : morph_general(cur, se, dilation);
    }
    return cur;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se, unsigned iterations) {
    return morph(mask, se, iterations, true);
}

BinaryMask erode(const BinaryMask& mask, const StructuringElement& se, unsigned iterations) {
    return morph(mask, se, iterations, false);
}

std::vector<Component> connected_components(const BinaryMask& mask, std::size_t min_area) {
    const std::size_t W = mask.width();
    const std::size_t H = mask.height();
    std::vector<std::uint8_t> seen(W * H, 0);
    std::vector<std::size_t> stack;

    struct Found {
        Component comp;
        std::size_t first;
    };
    std::vector<Found> found;

    for (std::size_t start = 0; start < W * H; ++start) {
        if (!mask.bits()[start] || seen[start]) continue;
        std::size_t min_x = W, min_y = H, max_x = 0, max_y = 0, area = 0;
        seen[start] = 1;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t idx = stack.back();
            stack.pop_back();
            const std::size_t x = idx % W;
            const std::size_t y = idx / W;
            ++area;
            min_x = std::min(min_x, x);
            max_x = std::max(max_x, x);
            min_y = std::min(min_y, y);
            max_y = std::max(max_y, y);
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dx == 0 && dy == 0) continue;
                    const auto nx = static_cast<std::ptrdiff_t>(x) + dx;
                    const auto ny = static_cast<std::ptrdiff_t>(y) + dy;
                    if (nx < 0 || ny < 0 || nx >= std::ptrdiff_t(W) || ny >= std::ptrdiff_t(H)) continue;
                    const std::size_t n = std::size_t(ny) * W + std::size_t(nx);
                    if (mask.bits()[n] && !seen[n]) {
                        seen[n] = 1;
                        stack.push_back(n);
                    }
                }
            }
        }
        if (area >= min_area) {
            found.push_back({{{min_x, min_y, max_x - min_x + 1, max_y - min_y + 1}, area}, start});
        }
    }
    std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
        if (a.comp.box.y != b.comp.box.y) return a.comp.box.y < b.comp.box.y;
        return a.comp.box.x < b.comp.box.x;
    });
    std::vector<Component> out;
    out.reserve(found.size());
    for (const auto& f : found) out.push_back(f.comp);
    return out;
}

}  // namespace vstain
