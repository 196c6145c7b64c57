#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vstain/image.hpp"

namespace vstain {

/// Returned by hausdorff() when exactly one mask is empty.
inline constexpr double kHausdorffUndefined = std::numeric_limits<double>::infinity();

struct SegScore {
    double dice = 1.0;
    double iou = 1.0;
    double hausdorff = 0.0;
    std::optional<double> tpr;  // empty when the ground truth has no positives
    std::optional<double> tnr;  // empty when the ground truth has no negatives
    std::size_t gt_positive = 0;
    std::size_t pred_positive = 0;
    std::size_t pixels = 0;
    bool both_empty = false;
};

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

Confusion confusion(const BinaryMask& gt, const BinaryMask& pred);

/// 2|P∩GT| / (|P| + |GT|); 1 when both are empty.
double dice(const BinaryMask& gt, const BinaryMask& pred);

/// |P∩GT| / |P∪GT|; 1 when both are empty.
double iou(const BinaryMask& gt, const BinaryMask& pred);

/// Symmetric Hausdorff distance in pixels over all positive pixel centers.
/// 0 when both masks are empty, kHausdorffUndefined when exactly one is.
double hausdorff(const BinaryMask& gt, const BinaryMask& pred);

/// Squared Euclidean distance from each pixel to the nearest positive pixel,
/// exact in integers. Requires a nonempty mask.
std::vector<std::uint64_t> squared_distance_transform(const BinaryMask& mask);

struct Rates {
    std::optional<double> tpr;
    std::optional<double> tnr;
};

Rates tpr_tnr(const BinaryMask& gt, const BinaryMask& pred);

SegScore score_pair(const BinaryMask& gt, const BinaryMask& pred);

struct MaskPair {
    BinaryMask gt;
    BinaryMask pred;
};

/// Means over scored pairs; undefined entries (infinite HD, missing rates)
/// are left out and tallied.
struct SegAggregate {
    std::size_t n = 0;
    double dice = 0.0;
    double iou = 0.0;
    double hausdorff = 0.0;
    std::size_t hausdorff_n = 0;
    std::size_t hausdorff_excluded = 0;
    double tpr = 0.0;
    std::size_t tpr_n = 0;
    double tnr = 0.0;
    std::size_t tnr_n = 0;
};

struct SegBatch {
    struct Entry {
        std::size_t index;
        SegScore score;
    };
    struct Failure {
        std::size_t index;
        std::string message;
    };
    std::vector<Entry> scored;
    std::vector<Failure> failures;
    std::size_t excluded = 0;  // pairs skipped for an empty ground truth
    SegAggregate aggregate;
};

SegBatch score_batch(std::span<const MaskPair> pairs, bool positives_only = true);

}  // namespace vstain
