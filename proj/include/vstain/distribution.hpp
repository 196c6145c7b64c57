#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vstain/image.hpp"

namespace vstain {

/// n×d embedding matrix, one row per image.
class FeatureSet {
public:
    FeatureSet(std::size_t n, std::size_t d, std::vector<float> data, std::string encoder_tag = {},
               std::vector<std::string> ids = {});

    std::size_t n() const noexcept { return n_; }
    std::size_t d() const noexcept { return d_; }
    std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * d_, d_}; }
    std::span<const float> data() const noexcept { return data_; }
    const std::string& encoder_tag() const noexcept { return encoder_tag_; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    bool has_ids() const noexcept { return !ids_.empty(); }

    /// Rows picked by index, in the given order.
    FeatureSet subset(std::span<const std::size_t> rows) const;

    friend bool operator==(const FeatureSet&, const FeatureSet&) = default;

private:
    std::size_t n_;
    std::size_t d_;
    std::vector<float> data_;
    std::string encoder_tag_;
    std::vector<std::string> ids_;
};

/// Sample mean and covariance (1/(n−1)); cov is d×d row-major.
struct GaussianMoments {
    std::size_t d = 0;
    std::vector<double> mean;
    std::vector<double> cov;
};

GaussianMoments moments(const FeatureSet& fs);

/// ||μa − μb||² + Tr(Σa + Σb − 2·(Σa Σb)^½), clamped at zero.
double frechet_distance(const GaussianMoments& a, const GaussianMoments& b);

enum class MmdEstimator { biased, unbiased };

struct KidSubsets {
    std::size_t count = 10;
    std::size_t size = 1000;
    std::uint64_t seed = 0;
};

/// k(u, v) = (u·v / d + 1)³
double polynomial_kernel(std::span<const float> u, std::span<const float> v);

/// Squared MMD with the cubic polynomial kernel. With `subsets`, the mean over
/// that many random subsets (drawn without replacement, size clamped to the
/// smaller set) is returned.
double kernel_distance(const FeatureSet& x, const FeatureSet& y, MmdEstimator estimator = MmdEstimator::unbiased,
                       std::optional<KidSubsets> subsets = std::nullopt);

/// Union of balls around each point with radius = distance to its k-th nearest
/// other point.
struct ManifoldIndex {
    const FeatureSet* points = nullptr;
    std::size_t k = 0;
    std::vector<double> radii;
};

ManifoldIndex build_manifold(const FeatureSet& points, std::size_t k);

/// Fraction of `queries` inside the manifold (distance ≤ radius of some point).
double fraction_inside(const ManifoldIndex& manifold, const FeatureSet& queries);

/// Fraction of generated samples inside the real manifold (requires k < n_real).
double manifold_precision(const FeatureSet& real, const FeatureSet& gen, std::size_t k = 3);

/// Fraction of real samples inside the generated manifold (requires k < n_gen).
double manifold_recall(const FeatureSet& real, const FeatureSet& gen, std::size_t k = 3);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

PrecisionRecall precision_recall(const FeatureSet& real, const FeatureSet& gen, std::size_t k = 3);

inline constexpr std::size_t kToyEncoderDim = 64;
inline constexpr const char* kToyEncoderTag = "toy-v1";

/// Handcrafted 64-d embedding: 16-bin gray histogram, 16-bin DAB histogram
/// (bin width 0.1 concentration units, last bin open-ended) and an 8×4
/// mean-pooled gray thumbnail; each block sums to one.
std::vector<float> toy_encoder(const ImageTile& img);

}  // namespace vstain
