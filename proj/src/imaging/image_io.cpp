#include "vstain/image_io.hpp"

#include <png.h>
#include <tiffio.h>

#include <algorithm>
#include <array>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "vstain/errors.hpp"

namespace vstain {
namespace {

enum class Container { png, tiff };

// Decoded raster with 1 or 3 channels.
struct Raster {
    std::size_t width = 0;
    std::size_t height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;
};

Container sniff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::array<unsigned char, 8> sig{};
    in.read(reinterpret_cast<char*>(sig.data()), sig.size());
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got >= 8 && png_sig_cmp(sig.data(), 0, 8) == 0) return Container::png;
    if (got >= 4 && ((sig[0] == 'I' && sig[1] == 'I' && sig[2] == 42 && sig[3] == 0) ||
                     (sig[0] == 'M' && sig[1] == 'M' && sig[2] == 0 && sig[3] == 42))) {
        return Container::tiff;
    }
    throw Error(ErrorCode::UnsupportedFormat, "unrecognized image signature in " + path.string());
}

Container container_for_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
    if (ext == ".png") return Container::png;
    if (ext == ".tif" || ext == ".tiff") return Container::tiff;
    throw Error(ErrorCode::UnsupportedFormat, "no writer for extension '" + ext + "'");
}

Raster read_png(const std::filesystem::path& path) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str())) {
        throw Error(ErrorCode::CorruptFile, path.string() + ": " + image.message);
    }
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": only 8-bit PNG is supported");
    }
    Raster r;
    r.width = image.width;
    r.height = image.height;
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) || (image.format & PNG_FORMAT_FLAG_COLORMAP);
    r.channels = color ? 3 : 1;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    r.data.resize(PNG_IMAGE_SIZE(image));
    // A background of white is used when compositing alpha away.
    png_color background{255, 255, 255};
    if (!png_image_finish_read(&image, &background, r.data.data(), 0, nullptr)) {
        const std::string msg = image.message;
        png_image_free(&image);
        throw Error(ErrorCode::CorruptFile, path.string() + ": " + msg);
    }
    return r;
}

void write_png(const std::filesystem::path& path, const std::uint8_t* data, std::size_t w, std::size_t h,
               int channels) {
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(w);
    image.height = static_cast<png_uint_32>(h);
    image.format = channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
        throw Error(ErrorCode::IoError, path.string() + ": " + image.message);
    }
}

thread_local std::string tiff_last_error;

void tiff_error_handler(const char* module, const char* fmt, va_list ap) {
    char buf[512];
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    tiff_last_error = std::string(module ? module : "tiff") + ": " + buf;
}

void install_tiff_handlers() {
    static const bool installed = [] {
        TIFFSetErrorHandler(tiff_error_handler);
        TIFFSetWarningHandler(nullptr);
        return true;
    }();
    (void)installed;
}

struct TiffCloser {
    void operator()(TIFF* t) const noexcept { TIFFClose(t); }
};
using TiffHandle = std::unique_ptr<TIFF, TiffCloser>;

Raster read_tiff(const std::filesystem::path& path) {
    install_tiff_handlers();
    tiff_last_error.clear();
    TiffHandle tif(TIFFOpen(path.c_str(), "r"));
    if (!tif) throw Error(ErrorCode::CorruptFile, path.string() + ": " + tiff_last_error);

    std::uint32_t w = 0, h = 0;
    std::uint16_t bps = 0, spp = 1, planar = PLANARCONFIG_CONTIG, photometric = 0;
    TIFFGetField(tif.get(), TIFFTAG_IMAGEWIDTH, &w);
    TIFFGetField(tif.get(), TIFFTAG_IMAGELENGTH, &h);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_BITSPERSAMPLE, &bps);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_SAMPLESPERPIXEL, &spp);
    TIFFGetFieldDefaulted(tif.get(), TIFFTAG_PLANARCONFIG, &planar);
    TIFFGetField(tif.get(), TIFFTAG_PHOTOMETRIC, &photometric);
    if (w == 0 || h == 0) throw Error(ErrorCode::CorruptFile, path.string() + ": zero-sized TIFF");
    if (bps != 8) throw Error(ErrorCode::UnsupportedFormat, path.string() + ": only 8-bit TIFF is supported");
    if (planar != PLANARCONFIG_CONTIG) {
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": planar TIFF is not supported");
    }
    const bool gray = photometric == PHOTOMETRIC_MINISBLACK && spp == 1;
    const bool rgb = photometric == PHOTOMETRIC_RGB && (spp == 3 || spp == 4);
    if (!gray && !rgb) {
        throw Error(ErrorCode::UnsupportedFormat, path.string() + ": unsupported TIFF photometric/sample layout");
    }

    Raster r;
    r.width = w;
    r.height = h;
    r.channels = gray ? 1 : 3;
    r.data.resize(std::size_t(w) * h * std::size_t(r.channels));
    std::vector<std::uint8_t> line(static_cast<std::size_t>(TIFFScanlineSize(tif.get())));
    for (std::uint32_t y = 0; y < h; ++y) {
        if (TIFFReadScanline(tif.get(), line.data(), y, 0) < 0) {
            throw Error(ErrorCode::CorruptFile, path.string() + ": " + tiff_last_error);
        }
        std::uint8_t* dst = &r.data[std::size_t(y) * w * std::size_t(r.channels)];
        for (std::uint32_t x = 0; x < w; ++x) {
            for (int c = 0; c < r.channels; ++c) dst[x * std::size_t(r.channels) + c] = line[x * spp + c];
        }
    }
    return r;
}

void write_tiff(const std::filesystem::path& path, const std::uint8_t* data, std::size_t w, std::size_t h,
                int channels) {
    install_tiff_handlers();
    tiff_last_error.clear();
    TiffHandle tif(TIFFOpen(path.c_str(), "w"));
    if (!tif) throw Error(ErrorCode::IoError, path.string() + ": " + tiff_last_error);
    TIFFSetField(tif.get(), TIFFTAG_IMAGEWIDTH, static_cast<std::uint32_t>(w));
    TIFFSetField(tif.get(), TIFFTAG_IMAGELENGTH, static_cast<std::uint32_t>(h));
    TIFFSetField(tif.get(), TIFFTAG_BITSPERSAMPLE, 8);
    TIFFSetField(tif.get(), TIFFTAG_SAMPLESPERPIXEL, channels);
    TIFFSetField(tif.get(), TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
    TIFFSetField(tif.get(), TIFFTAG_PHOTOMETRIC, channels == 3 ? PHOTOMETRIC_RGB : PHOTOMETRIC_MINISBLACK);
    TIFFSetField(tif.get(), TIFFTAG_COMPRESSION, COMPRESSION_ADOBE_DEFLATE);
    TIFFSetField(tif.get(), TIFFTAG_ROWSPERSTRIP, TIFFDefaultStripSize(tif.get(), 0));
    std::vector<std::uint8_t> line(w * std::size_t(channels));
    for (std::size_t y = 0; y < h; ++y) {
        std::copy_n(data + y * line.size(), line.size(), line.begin());
        if (TIFFWriteScanline(tif.get(), line.data(), static_cast<std::uint32_t>(y), 0) < 0) {
            throw Error(ErrorCode::IoError, path.string() + ": " + tiff_last_error);
        }
    }
}

Raster read_raster(const std::filesystem::path& path) {
    return sniff(path) == Container::png ? read_png(path) : read_tiff(path);
}

void write_raster(const std::filesystem::path& path, const std::uint8_t* data, std::size_t w, std::size_t h,
                  int channels) {
    if (container_for_extension(path) == Container::png) {
        write_png(path, data, w, h, channels);
    } else {
        write_tiff(path, data, w, h, channels);
    }
}

}  // namespace

ImageTile read_image(const std::filesystem::path& path) {
    Raster r = read_raster(path);
    if (r.channels == 3) return ImageTile(r.width, r.height, std::move(r.data));
    std::vector<std::uint8_t> rgb(r.width * r.height * 3);
    for (std::size_t i = 0; i < r.width * r.height; ++i) rgb[3 * i] = rgb[3 * i + 1] = rgb[3 * i + 2] = r.data[i];
    return ImageTile(r.width, r.height, std::move(rgb));
}

void write_image(const std::filesystem::path& path, const ImageTile& img) {
    write_raster(path, img.pixels().data(), img.width(), img.height(), 3);
}

GrayImage read_gray(const std::filesystem::path& path) {
    Raster r = read_raster(path);
    if (r.channels != 1) throw Error(ErrorCode::UnsupportedFormat, path.string() + ": expected single channel");
    return GrayImage(r.width, r.height, std::move(r.data));
}

void write_gray(const std::filesystem::path& path, const GrayImage& img) {
    write_raster(path, img.pixels().data(), img.width(), img.height(), 1);
}

BinaryMask read_mask(const std::filesystem::path& path) {
    Raster r = read_raster(path);
    BinaryMask out(r.width, r.height);
    auto bits = out.bits();
    const auto ch = static_cast<std::size_t>(r.channels);
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bool any = false;
        for (std::size_t c = 0; c < ch; ++c) any = any || r.data[i * ch + c] != 0;
        bits[i] = any ? 1 : 0;
    }
    return out;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> gray(mask.pixel_count());
    auto bits = mask.bits();
    for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = bits[i] ? 255 : 0;
    write_raster(path, gray.data(), mask.width(), mask.height(), 1);
}

}  // namespace vstain
