#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"
#include "vstain/distribution.hpp"
#include "vstain/preprocess.hpp"
#include "vstain/stain.hpp"
#include "vstain/texture.hpp"

namespace vstain {

struct KidConfig {
    MmdEstimator estimator = MmdEstimator::unbiased;
    std::size_t subsets = 10;  // 0 evaluates the full sets once
    std::size_t subset_size = 1000;
};

struct PatchConfig {
    std::size_t size = 256;
    std::size_t per_class = 8;
};

struct RunConfig {
    std::array<double, 9> basis = StainBasis::hed_default().values();
    double dab_threshold = 0.15;
    MorphologySpec cleanup;
    bool otsu_dab = false;
    SsimParams ssim;
    std::size_t tile = 256;
    std::size_t overlap = 192;
    std::size_t manifold_k = 3;
    KidConfig kid;
    std::uint64_t seed = 0;
    bool positives_only = true;
    bool allow_tag_mismatch = false;
    TissueParams tissue;
    AoiParams aoi;
    PatchConfig patches;

    /// Module preconditions on every field; throws ConfigError.
    void validate() const;
};

/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Full effective configuration. Object keys are emitted sorted, so the dump
/// does not depend on the key order of the source file.
nlohmann::json to_json(const RunConfig& cfg);

/// Lowercase hex SHA-256 of the compact canonical dump.
std::string config_digest(const RunConfig& cfg);

std::string sha256_hex(const std::string& bytes);

}  // namespace vstain
