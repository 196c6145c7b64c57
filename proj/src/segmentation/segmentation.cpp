#include "vstain/segmentation.hpp"

#include <algorithm>
#include <cmath>

#include "vstain/errors.hpp"

namespace vstain {
namespace {

void require_same_size(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                        std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

// Largest squared distance from a positive pixel of `from` to the nearest
// positive pixel of `to` (whose distance transform is `dt_to`).
std::uint64_t directed_sq(const BinaryMask& from, const std::vector<std::uint64_t>& dt_to) {
    std::uint64_t worst = 0;
    auto bits = from.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) worst = std::max(worst, dt_to[i]);
    }
    return worst;
}

}  // namespace

Confusion confusion(const BinaryMask& gt, const BinaryMask& pred) {
    require_same_size(gt, pred);
    Confusion c;
    auto g = gt.bits();
    auto p = pred.bits();
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i]) {
            (p[i] ? c.tp : c.fn) += 1;
        } else {
            (p[i] ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

double dice(const BinaryMask& gt, const BinaryMask& pred) {
    const Confusion c = confusion(gt, pred);
    const std::size_t denom = 2 * c.tp + c.fp + c.fn;
    return denom == 0 ? 1.0 : double(2 * c.tp) / double(denom);
}

double iou(const BinaryMask& gt, const BinaryMask& pred) {
    const Confusion c = confusion(gt, pred);
    const std::size_t uni = c.tp + c.fp + c.fn;
    return uni == 0 ? 1.0 : double(c.tp) / double(uni);
}

std::vector<std::uint64_t> squared_distance_transform(const BinaryMask& mask) {
    // Meijster, Roerdink & Hesselink two-phase exact EDT.
    const auto W = static_cast<std::int64_t>(mask.width());
    const auto H = static_cast<std::int64_t>(mask.height());
    if (mask.empty_set()) throw Error(ErrorCode::InvalidArgument, "distance transform of an empty mask");
    const std::int64_t inf = W + H;

    std::vector<std::int64_t> g(std::size_t(W * H));
    for (std::int64_t x = 0; x < W; ++x) {
        g[std::size_t(x)] = mask.at(std::size_t(x), 0) ? 0 : inf;
        for (std::int64_t y = 1; y < H; ++y) {
            const std::size_t i = std::size_t(y * W + x);
            g[i] = mask.bits()[i] ? 0 : std::min(inf, g[i - std::size_t(W)] + 1);
        }
        for (std::int64_t y = H - 2; y >= 0; --y) {
            const std::size_t i = std::size_t(y * W + x);
            const std::int64_t below = g[i + std::size_t(W)];
            if (below < g[i]) g[i] = below + 1;
        }
    }

    std::vector<std::uint64_t> dt(std::size_t(W * H));
    std::vector<std::int64_t> s(static_cast<std::size_t>(W));
    std::vector<std::int64_t> t(static_cast<std::size_t>(W));
    for (std::int64_t y = 0; y < H; ++y) {
        const std::int64_t* row = &g[std::size_t(y * W)];
        auto f = [row](std::int64_t x, std::int64_t i) { return (x - i) * (x - i) + row[i] * row[i]; };
        auto sep = [row](std::int64_t i, std::int64_t u) {
            return floor_div(u * u - i * i + row[u] * row[u] - row[i] * row[i], 2 * (u - i));
        };
        std::int64_t q = 0;
        s[0] = 0;
        t[0] = 0;
        for (std::int64_t u = 1; u < W; ++u) {
            while (q >= 0 && f(t[std::size_t(q)], s[std::size_t(q)]) > f(t[std::size_t(q)], u)) --q;
            if (q < 0) {
                q = 0;
                s[0] = u;
            } else {
                const std::int64_t w = 1 + sep(s[std::size_t(q)], u);
                if (w < W) {
                    ++q;
                    s[std::size_t(q)] = u;
                    t[std::size_t(q)] = w;
                }
            }
        }
        for (std::int64_t u = W - 1; u >= 0; --u) {
            dt[std::size_t(y * W + u)] = std::uint64_t(f(u, s[std::size_t(q)]));
            if (u == t[std::size_t(q)]) --q;
        }
    }
    return dt;
}

double hausdorff(const BinaryMask& gt, const BinaryMask& pred) {
    require_same_size(gt, pred);
    const bool gt_empty = gt.empty_set();
    const bool pred_empty = pred.empty_set();
    if (gt_empty && pred_empty) return 0.0;
    if (gt_empty || pred_empty) return kHausdorffUndefined;
    const std::uint64_t forward = directed_sq(gt, squared_distance_transform(pred));
    const std::uint64_t backward = directed_sq(pred, squared_distance_transform(gt));
    return std::sqrt(double(std::max(forward, backward)));
}

Rates tpr_tnr(const BinaryMask& gt, const BinaryMask& pred) {
    const Confusion c = confusion(gt, pred);
    Rates r;
    if (c.tp + c.fn > 0) r.tpr = double(c.tp) / double(c.tp + c.fn);
    if (c.tn + c.fp > 0) r.tnr = double(c.tn) / double(c.tn + c.fp);
    return r;
}

SegScore score_pair(const BinaryMask& gt, const BinaryMask& pred) {
    const Confusion c = confusion(gt, pred);
    SegScore s;
    s.gt_positive = c.tp + c.fn;
    s.pred_positive = c.tp + c.fp;
    s.pixels = gt.pixel_count();
    s.both_empty = s.gt_positive == 0 && s.pred_positive == 0;
    const std::size_t dice_den = 2 * c.tp + c.fp + c.fn;
    const std::size_t uni = c.tp + c.fp + c.fn;
    s.dice = dice_den == 0 ? 1.0 : double(2 * c.tp) / double(dice_den);
    s.iou = uni == 0 ? 1.0 : double(c.tp) / double(uni);
    s.hausdorff = hausdorff(gt, pred);
    if (c.tp + c.fn > 0) s.tpr = double(c.tp) / double(c.tp + c.fn);
    if (c.tn + c.fp > 0) s.tnr = double(c.tn) / double(c.tn + c.fp);
    return s;
}

SegBatch score_batch(std::span<const MaskPair> pairs, bool positives_only) {
    SegBatch batch;
    double sum_dice = 0, sum_iou = 0, sum_hd = 0, sum_tpr = 0, sum_tnr = 0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        try {
            const SegScore s = score_pair(pairs[i].gt, pairs[i].pred);
            if (positives_only && s.gt_positive == 0) {
                ++batch.excluded;
                continue;
            }
            batch.scored.push_back({i, s});
        } catch (const Error& e) {
            batch.failures.push_back({i, e.what()});
        }
    }
    SegAggregate& agg = batch.aggregate;
    for (const auto& entry : batch.scored) {
        const SegScore& s = entry.score;
        sum_dice += s.dice;
        sum_iou += s.iou;
        if (std::isfinite(s.hausdorff)) {
            sum_hd += s.hausdorff;
            ++agg.hausdorff_n;
        } else {
            ++agg.hausdorff_excluded;
        }
        if (s.tpr) {
            sum_tpr += *s.tpr;
            ++agg.tpr_n;
        }
        if (s.tnr) {
            sum_tnr += *s.tnr;
            ++agg.tnr_n;
        }
    }
    agg.n = batch.scored.size();
    if (agg.n > 0) {
        agg.dice = sum_dice / double(agg.n);
        agg.iou = sum_iou / double(agg.n);
    }
    if (agg.hausdorff_n > 0) agg.hausdorff = sum_hd / double(agg.hausdorff_n);
    if (agg.tpr_n > 0) agg.tpr = sum_tpr / double(agg.tpr_n);
    if (agg.tnr_n > 0) agg.tnr = sum_tnr / double(agg.tnr_n);
    return batch;
}

}  // namespace vstain
