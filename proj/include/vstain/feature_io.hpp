#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vstain/distribution.hpp"

namespace vstain {

inline constexpr std::uint32_t kFeatVersion = 1;

/// FEAT1, little-endian:
///   "FEAT" | u32 version | u32 n | u32 d | u16 tag length + UTF-8 tag
///   | n·d f32 row-major | u8 id flag [| n × (u16 length + UTF-8 id)]
/// A file ending right after the payload is read as having no ids.
std::vector<std::uint8_t> encode_features(const FeatureSet& fs);
FeatureSet decode_features(const std::vector<std::uint8_t>& bytes);

FeatureSet read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const FeatureSet& fs);

}  // namespace vstain
