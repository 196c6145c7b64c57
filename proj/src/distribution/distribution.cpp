#include "vstain/distribution.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "vstain/errors.hpp"
#include "vstain/imaging.hpp"
#include "vstain/parallel.hpp"
#include "vstain/rng.hpp"
#include "vstain/simd/kernels.hpp"
#include "vstain/stain.hpp"

namespace vstain {

FeatureSet::FeatureSet(std::size_t n, std::size_t d, std::vector<float> data, std::string encoder_tag,
                       std::vector<std::string> ids)
    : n_(n), d_(d), data_(std::move(data)), encoder_tag_(std::move(encoder_tag)), ids_(std::move(ids)) {
    if (n_ == 0 || d_ == 0) throw Error(ErrorCode::InvalidArgument, "feature set needs n >= 1 and d >= 1");
    if (data_.size() != n_ * d_) throw Error(ErrorCode::InvalidArgument, "feature data length != n*d");
    if (!ids_.empty() && ids_.size() != n_) throw Error(ErrorCode::InvalidArgument, "id count != n");
    for (float v : data_) {
        if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "feature set contains NaN or Inf");
    }
}

FeatureSet FeatureSet::subset(std::span<const std::size_t> rows) const {
    std::vector<float> out;
    out.reserve(rows.size() * d_);
    std::vector<std::string> ids;
    for (std::size_t r : rows) {
        if (r >= n_) throw Error(ErrorCode::InvalidArgument, "subset row out of range");
        auto src = row(r);
        out.insert(out.end(), src.begin(), src.end());
        if (!ids_.empty()) ids.push_back(ids_[r]);
    }
    return FeatureSet(rows.size(), d_, std::move(out), encoder_tag_, std::move(ids));
}

GaussianMoments moments(const FeatureSet& fs) {
    if (fs.n() < 2) throw Error(ErrorCode::TooFewSamples, "moments need at least two samples");
    const auto n = static_cast<Eigen::Index>(fs.n());
    const auto d = static_cast<Eigen::Index>(fs.d());
    Eigen::MatrixXd x(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        auto r = fs.row(std::size_t(i));
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = r[std::size_t(j)];
    }
    const Eigen::RowVectorXd mu = x.colwise().mean();
    x.rowwise() -= mu;
    Eigen::MatrixXd cov = (x.transpose() * x) / double(n - 1);
    cov = 0.5 * (cov + cov.transpose()).eval();

    GaussianMoments m;
    m.d = fs.d();
    m.mean.assign(mu.data(), mu.data() + d);
    m.cov.resize(std::size_t(d * d));
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) m.cov[std::size_t(i * d + j)] = cov(i, j);
    }
    return m;
}

namespace {

Eigen::MatrixXd as_matrix(const GaussianMoments& m) {
    const auto d = static_cast<Eigen::Index>(m.d);
    Eigen::MatrixXd out(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) out(i, j) = m.cov[std::size_t(i * d + j)];
    }
    return out;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen_symmetric(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "eigendecomposition failed");
    return solver;
}

}  // namespace

double frechet_distance(const GaussianMoments& a, const GaussianMoments& b) {
    if (a.d != b.d) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(a.d) + " vs " + std::to_string(b.d));
    }
    if (a.mean.size() != a.d || b.mean.size() != b.d || a.cov.size() != a.d * a.d || b.cov.size() != b.d * b.d) {
        throw Error(ErrorCode::InvalidArgument, "malformed moments");
    }
    double mean_term = 0.0;
    for (std::size_t i = 0; i < a.d; ++i) {
        const double diff = a.mean[i] - b.mean[i];
        mean_term += diff * diff;
    }
    const Eigen::MatrixXd ca = as_matrix(a);
    const Eigen::MatrixXd cb = as_matrix(b);

    // Tr((Σa Σb)^½) = Tr((Σa^½ Σb Σa^½)^½); the right side is symmetric PSD.
    const auto ea = eigen_symmetric(ca);
    const Eigen::VectorXd sqrt_vals = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXd sqrt_a = ea.eigenvectors() * sqrt_vals.asDiagonal() * ea.eigenvectors().transpose();
    Eigen::MatrixXd inner = sqrt_a * cb * sqrt_a;
    inner = 0.5 * (inner + inner.transpose()).eval();
    const auto ei = eigen_symmetric(inner);
    const double tr_sqrt = ei.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

    const double value = mean_term + ca.trace() + cb.trace() - 2.0 * tr_sqrt;
    if (!std::isfinite(value)) throw Error(ErrorCode::NumericalFailure, "non-finite Fréchet distance");
    return std::max(0.0, value);
}

double polynomial_kernel(std::span<const float> u, std::span<const float> v) {
    const double s = simd::active().dot_f32(u.data(), v.data(), u.size()) / double(u.size()) + 1.0;
    return s * s * s;
}

namespace {

struct KernelSums {
    double total = 0.0;     // Σ over all (i, j)
    double diagonal = 0.0;  // Σ over i == j, meaningful for within-set sums
};

KernelSums kernel_sums(const FeatureSet& x, const FeatureSet& y, bool same_set) {
    std::vector<double> row_totals(x.n(), 0.0);
    parallel_for(x.n(), [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < y.n(); ++j) acc += polynomial_kernel(x.row(i), y.row(j));
        row_totals[i] = acc;
    });
    KernelSums s;
    for (double r : row_totals) s.total += r;
    if (same_set) {
        for (std::size_t i = 0; i < x.n(); ++i) s.diagonal += polynomial_kernel(x.row(i), x.row(i));
    }
    return s;
}

double mmd2(const FeatureSet& x, const FeatureSet& y, MmdEstimator estimator) {
    const double m = double(x.n());
    const double n = double(y.n());
    const KernelSums kxx = kernel_sums(x, x, true);
    const KernelSums kyy = kernel_sums(y, y, true);
    const KernelSums kxy = kernel_sums(x, y, false);
    if (estimator == MmdEstimator::biased) {
        return (kxx.total / (m * m) + kyy.total / (n * n)) - 2.0 * (kxy.total / (m * n));
    }
    return (kxx.total - kxx.diagonal) / (m * (m - 1.0)) + (kyy.total - kyy.diagonal) / (n * (n - 1.0)) -
           2.0 * (kxy.total / (m * n));
}

}  // namespace

double kernel_distance(const FeatureSet& x, const FeatureSet& y, MmdEstimator estimator,
                       std::optional<KidSubsets> subsets) {
    if (x.d() != y.d()) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(x.d()) + " vs " + std::to_string(y.d()));
    }
    const std::size_t min_n = std::min(x.n(), y.n());
    const std::size_t effective = subsets ? std::min(subsets->size, min_n) : min_n;
    if (estimator == MmdEstimator::unbiased && effective < 2) {
        throw Error(ErrorCode::TooFewSamples, "unbiased MMD needs at least two samples per set");
    }
    if (!subsets) return mmd2(x, y, estimator);
    if (subsets->count == 0 || effective == 0) throw Error(ErrorCode::InvalidArgument, "empty subset specification");

    Rng rng(subsets->seed);
    double sum = 0.0;
    for (std::size_t s = 0; s < subsets->count; ++s) {
        const auto xi = sample_indices(rng, x.n(), effective);
        const auto yi = sample_indices(rng, y.n(), effective);
        sum += mmd2(x.subset(xi), y.subset(yi), estimator);
    }
    return sum / double(subsets->count);
}

namespace {

// Squared radii kept alongside so membership compares squared distances and
// avoids a sqrt per pair.
double fraction_inside_sq(const FeatureSet& points, const std::vector<double>& radii_sq,
                          const FeatureSet& queries) {
    if (points.d() != queries.d()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(points.d()) + " vs " + std::to_string(queries.d()));
    }
    const auto& kern = simd::active();
    std::vector<std::uint8_t> inside(queries.n(), 0);
    parallel_for(queries.n(), [&](std::size_t q) {
        for (std::size_t i = 0; i < points.n(); ++i) {
            if (kern.sq_dist_f32(queries.row(q).data(), points.row(i).data(), points.d()) <= radii_sq[i]) {
                inside[q] = 1;
                return;
            }
        }
    });
    const auto hits = std::accumulate(inside.begin(), inside.end(), std::size_t{0});
    return double(hits) / double(queries.n());
}

std::vector<double> kth_neighbor_sq(const FeatureSet& points, std::size_t k) {
    if (k == 0 || k >= points.n()) {
        throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " needs 1 <= k < n=" + std::to_string(points.n()));
    }
    const auto& kern = simd::active();
    std::vector<double> out(points.n(), 0.0);
    parallel_for(points.n(), [&](std::size_t i) {
        std::vector<double> d2;
        d2.reserve(points.n() - 1);
        for (std::size_t j = 0; j < points.n(); ++j) {
            if (j != i) d2.push_back(kern.sq_dist_f32(points.row(i).data(), points.row(j).data(), points.d()));
        }
        std::nth_element(d2.begin(), d2.begin() + std::ptrdiff_t(k - 1), d2.end());
        out[i] = d2[k - 1];
    });
    return out;
}

}  // namespace

ManifoldIndex build_manifold(const FeatureSet& points, std::size_t k) {
    ManifoldIndex index;
    index.points = &points;
    index.k = k;
    index.radii = kth_neighbor_sq(points, k);
    for (double& r : index.radii) r = std::sqrt(r);
    return index;
}

double fraction_inside(const ManifoldIndex& manifold, const FeatureSet& queries) {
    if (manifold.points == nullptr) throw Error(ErrorCode::InvalidArgument, "manifold has no points");
    std::vector<double> radii_sq(manifold.radii.size());
    for (std::size_t i = 0; i < radii_sq.size(); ++i) radii_sq[i] = manifold.radii[i] * manifold.radii[i];
    return fraction_inside_sq(*manifold.points, radii_sq, queries);
}

double manifold_precision(const FeatureSet& real, const FeatureSet& gen, std::size_t k) {
    if (real.d() != gen.d()) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(real.d()) + " vs " + std::to_string(gen.d()));
    }
    return fraction_inside_sq(real, kth_neighbor_sq(real, k), gen);
}

double manifold_recall(const FeatureSet& real, const FeatureSet& gen, std::size_t k) {
    return manifold_precision(gen, real, k);
}

PrecisionRecall precision_recall(const FeatureSet& real, const FeatureSet& gen, std::size_t k) {
    if (real.d() != gen.d()) {
        throw Error(ErrorCode::DimensionMismatch, std::to_string(real.d()) + " vs " + std::to_string(gen.d()));
    }
    if (k == 0 || k >= std::min(real.n(), gen.n())) {
        throw Error(ErrorCode::KTooLarge, "k=" + std::to_string(k) + " needs 1 <= k < min(n_real, n_gen)");
    }
    return {manifold_precision(real, gen, k), manifold_recall(real, gen, k)};
}

std::vector<float> toy_encoder(const ImageTile& img) {
    std::vector<double> out(kToyEncoderDim, 0.0);
    const GrayImage gray = to_grayscale(img);
    const StainImage stains = deconvolve(img, StainBasis::hed_default());
    const double npx = double(img.pixel_count());

    for (std::uint8_t v : gray.pixels()) out[v / 16] += 1.0;
    for (const Vec3& c : stains.data()) {
        const double dab = std::max(c[2], 0.0);
        const auto bin = static_cast<std::size_t>(std::min(15.0, std::floor(dab / 0.1)));
        out[16 + bin] += 1.0;
    }
    for (std::size_t i = 0; i < 32; ++i) out[i] /= npx;

    const std::size_t W = img.width();
    const std::size_t H = img.height();
    double thumb_total = 0.0;
    for (std::size_t cy = 0; cy < 4; ++cy) {
        const std::size_t y0 = cy * H / 4;
        const std::size_t y1 = std::max(y0 + 1, (cy + 1) * H / 4);
        for (std::size_t cx = 0; cx < 8; ++cx) {
            const std::size_t x0 = cx * W / 8;
            const std::size_t x1 = std::max(x0 + 1, (cx + 1) * W / 8);
            double sum = 0.0;
            std::size_t count = 0;
            for (std::size_t y = std::min(y0, H - 1); y < std::min(y1, H); ++y) {
                for (std::size_t x = std::min(x0, W - 1); x < std::min(x1, W); ++x) {
                    sum += gray.at(x, y);
                    ++count;
                }
            }
            const double mean = count ? sum / double(count) : 0.0;
            out[32 + cy * 8 + cx] = mean;
            thumb_total += mean;
        }
    }
    for (std::size_t i = 32; i < 64; ++i) out[i] = thumb_total > 0.0 ? out[i] / thumb_total : 1.0 / 32.0;

    return {out.begin(), out.end()};
}

}  // namespace vstain
