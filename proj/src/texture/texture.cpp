#include "vstain/texture.hpp"

#include <cmath>
#include <string>

#include "vstain/errors.hpp"
#include "vstain/imaging.hpp"
#include "vstain/simd/kernels.hpp"

namespace vstain {
namespace {

void require_same_size(const ImageTile& a, const ImageTile& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorCode::DimensionMismatch,
                    std::to_string(a.width()) + "x" + std::to_string(a.height()) + " vs " +
                        std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

// Valid-mode separable filter of a W×H plane with `taps`.
std::vector<double> filter_valid(const std::vector<double>& plane, std::size_t W, std::size_t H,
                                 const std::vector<double>& taps) {
    const auto& k = simd::active();
    const std::size_t win = taps.size();
    const std::size_t ow = W - win + 1;
    const std::size_t oh = H - win + 1;
    std::vector<double> rows(ow * H, 0.0);
    for (std::size_t y = 0; y < H; ++y) {
        double* dst = &rows[y * ow];
        const double* src = &plane[y * W];
        for (std::size_t t = 0; t < win; ++t) k.axpy_f64(dst, src + t, taps[t], ow);
    }
    std::vector<double> out(ow * oh, 0.0);
    for (std::size_t y = 0; y < oh; ++y) {
        double* dst = &out[y * ow];
        for (std::size_t t = 0; t < win; ++t) k.axpy_f64(dst, &rows[(y + t) * ow], taps[t], ow);
    }
    return out;
}

}  // namespace

void SsimParams::validate() const {
    if (window < 3 || window % 2 == 0) throw Error(ErrorCode::InvalidArgument, "SSIM window must be odd and >= 3");
    if (!(c1 > 0.0) || !(c2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "SSIM constants must be positive");
    if (kind == WindowKind::gaussian && !(sigma > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "SSIM gaussian sigma must be positive");
    }
}

double mse(const ImageTile& real, const ImageTile& virt) {
    require_same_size(real, virt);
    const std::uint64_t ssd =
        simd::active().sum_sq_diff_u8(real.pixels().data(), virt.pixels().data(), real.pixels().size());
    return static_cast<double>(ssd) / static_cast<double>(real.pixels().size());
}

double psnr_from_mse(double m) noexcept {
    if (m == 0.0) return kPsnrIdentical;
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

double psnr(const ImageTile& real, const ImageTile& virt) { return psnr_from_mse(mse(real, virt)); }

std::vector<double> ssim_window_taps(const SsimParams& params) {
    params.validate();
    std::vector<double> taps(params.window);
    if (params.kind == WindowKind::uniform) {
        for (double& t : taps) t = 1.0 / double(params.window);
        return taps;
    }
    const double r = double(params.window / 2);
    double sum = 0.0;
    for (std::size_t i = 0; i < taps.size(); ++i) {
        const double d = double(i) - r;
        taps[i] = std::exp(-d * d / (2.0 * params.sigma * params.sigma));
        sum += taps[i];
    }
    for (double& t : taps) t /= sum;
    return taps;
}

double ssim(const ImageTile& real, const ImageTile& virt, const SsimParams& params) {
    require_same_size(real, virt);
    const std::vector<double> taps = ssim_window_taps(params);
    const std::size_t W = real.width();
    const std::size_t H = real.height();
    if (W < params.window || H < params.window) {
        throw Error(ErrorCode::TooSmall, "image smaller than the SSIM window");
    }
    const GrayImage ga = to_grayscale(real);
    const GrayImage gb = to_grayscale(virt);
    const std::size_t n = W * H;
    std::vector<double> a(n), b(n), aa(n), bb(n), ab(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = ga.pixels()[i];
        b[i] = gb.pixels()[i];
        aa[i] = a[i] * a[i];
        bb[i] = b[i] * b[i];
        ab[i] = a[i] * b[i];
    }
    const auto mu_a = filter_valid(a, W, H, taps);
    const auto mu_b = filter_valid(b, W, H, taps);
    const auto e_aa = filter_valid(aa, W, H, taps);
    const auto e_bb = filter_valid(bb, W, H, taps);
    const auto e_ab = filter_valid(ab, W, H, taps);

    const double c1 = params.c1;
    const double c2 = params.c2;
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double va = e_aa[i] - ma * ma;
        const double vb = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / double(mu_a.size());
}

TextureScore score_texture(const ImageTile& real, const ImageTile& virt, const SsimParams& params) {
    TextureScore s;
    s.mse = mse(real, virt);
    s.psnr = psnr_from_mse(s.mse);
    s.ssim = ssim(real, virt, params);
    return s;
}

}  // namespace vstain
