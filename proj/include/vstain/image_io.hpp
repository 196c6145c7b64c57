#pragma once

#include <filesystem>

#include "vstain/image.hpp"

namespace vstain {

// Supported containers: PNG (8-bit gray / RGB / RGBA, palette) and TIFF
// (8-bit contiguous gray / RGB / RGBA, uncompressed or deflate). The reader
// sniffs the file signature; writers pick the container from the extension
// (.png, .tif, .tiff). Gray sources are replicated into RGB; alpha is dropped.

ImageTile read_image(const std::filesystem::path& path);
void write_image(const std::filesystem::path& path, const ImageTile& img);

GrayImage read_gray(const std::filesystem::path& path);
void write_gray(const std::filesystem::path& path, const GrayImage& img);

/// Masks are single-channel 0/255 on disk; any nonzero sample reads as positive.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

}  // namespace vstain
