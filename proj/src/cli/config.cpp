#include "vstain/config.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vstain/errors.hpp"

namespace vstain {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, std::initializer_list<const char*> known, const std::string& where) {
    if (!obj.is_object()) throw Error(ErrorCode::ConfigError, where + " must be an object");
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) throw Error(ErrorCode::ConfigError, "unknown key '" + where + key + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& dst, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        const json& v = obj.at(key);
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw Error(ErrorCode::ConfigError, "");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
                throw Error(ErrorCode::ConfigError, "");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw Error(ErrorCode::ConfigError, "");
        }
        dst = v.get<T>();
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "bad value for '" + where + key + "'");
    }
}

MorphOp parse_op(const std::string& s) {
    if (s == "dilate") return MorphOp::dilate;
    if (s == "erode") return MorphOp::erode;
    throw Error(ErrorCode::ConfigError, "unknown morphology op '" + s + "'");
}

}  // namespace

RunConfig config_from_json(const json& j) {
    RunConfig c;
    reject_unknown(j,
                   {"stain", "ssim", "grid", "manifold_k", "kid", "seed", "positives_only", "allow_tag_mismatch",
                    "tissue", "aoi", "patches"},
                   "");
    if (j.contains("stain")) {
        const json& s = j["stain"];
        reject_unknown(s, {"basis", "dab_threshold", "cleanup", "otsu_dab"}, "stain.");
        if (s.contains("basis")) {
            const json& b = s["basis"];
            if (!b.is_array() || b.size() != 9) throw Error(ErrorCode::ConfigError, "stain.basis needs 9 numbers");
            for (std::size_t i = 0; i < 9; ++i) {
                if (!b[i].is_number()) throw Error(ErrorCode::ConfigError, "stain.basis needs 9 numbers");
                c.basis[i] = b[i].get<double>();
            }
        }
        read(s, "dab_threshold", c.dab_threshold, "stain.");
        read(s, "otsu_dab", c.otsu_dab, "stain.");
        if (s.contains("cleanup")) {
            const json& steps = s["cleanup"];
            if (!steps.is_array()) throw Error(ErrorCode::ConfigError, "stain.cleanup must be an array");
            c.cleanup.steps.clear();
            for (const json& step : steps) {
                reject_unknown(step, {"op", "width", "height", "iterations"}, "stain.cleanup[].");
                MorphStep m;
                std::string op = "dilate";
                read(step, "op", op, "stain.cleanup[].");
                m.op = parse_op(op);
                read(step, "width", m.width, "stain.cleanup[].");
                read(step, "height", m.height, "stain.cleanup[].");
                read(step, "iterations", m.iterations, "stain.cleanup[].");
                c.cleanup.steps.push_back(m);
            }
        }
    }
    if (j.contains("ssim")) {
        const json& s = j["ssim"];
        reject_unknown(s, {"window", "kind", "sigma", "c1", "c2"}, "ssim.");
        read(s, "window", c.ssim.window, "ssim.");
        std::string kind = c.ssim.kind == WindowKind::gaussian ? "gaussian" : "uniform";
        read(s, "kind", kind, "ssim.");
        if (kind == "gaussian") {
            c.ssim.kind = WindowKind::gaussian;
        } else if (kind == "uniform") {
            c.ssim.kind = WindowKind::uniform;
        } else {
            throw Error(ErrorCode::ConfigError, "ssim.kind must be gaussian or uniform");
        }
        read(s, "sigma", c.ssim.sigma, "ssim.");
        read(s, "c1", c.ssim.c1, "ssim.");
        read(s, "c2", c.ssim.c2, "ssim.");
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        reject_unknown(g, {"tile", "overlap"}, "grid.");
        read(g, "tile", c.tile, "grid.");
        read(g, "overlap", c.overlap, "grid.");
    }
    read(j, "manifold_k", c.manifold_k, "");
    if (j.contains("kid")) {
        const json& k = j["kid"];
        reject_unknown(k, {"estimator", "subsets", "subset_size"}, "kid.");
        std::string est = c.kid.estimator == MmdEstimator::unbiased ? "unbiased" : "biased";
        read(k, "estimator", est, "kid.");
        if (est == "unbiased") {
            c.kid.estimator = MmdEstimator::unbiased;
        } else if (est == "biased") {
            c.kid.estimator = MmdEstimator::biased;
        } else {
            throw Error(ErrorCode::ConfigError, "kid.estimator must be biased or unbiased");
        }
        read(k, "subsets", c.kid.subsets, "kid.");
        read(k, "subset_size", c.kid.subset_size, "kid.");
    }
    read(j, "seed", c.seed, "");
    read(j, "positives_only", c.positives_only, "");
    read(j, "allow_tag_mismatch", c.allow_tag_mismatch, "");
    if (j.contains("tissue")) {
        const json& t = j["tissue"];
        reject_unknown(t, {"min_area", "morph_size", "morph_iterations"}, "tissue.");
        read(t, "min_area", c.tissue.min_area, "tissue.");
        read(t, "morph_size", c.tissue.morph_size, "tissue.");
        read(t, "morph_iterations", c.tissue.morph_iterations, "tissue.");
    }
    if (j.contains("aoi")) {
        const json& a = j["aoi"];
        reject_unknown(a, {"context", "tissue_threshold", "tissue_keep_above", "morph_size", "morph_iterations"},
                       "aoi.");
        read(a, "context", c.aoi.context, "aoi.");
        std::size_t threshold = c.aoi.tissue_threshold;
        read(a, "tissue_threshold", threshold, "aoi.");
        if (threshold > 255) throw Error(ErrorCode::ConfigError, "aoi.tissue_threshold must be <= 255");
        c.aoi.tissue_threshold = std::uint8_t(threshold);
        read(a, "tissue_keep_above", c.aoi.tissue_keep_above, "aoi.");
        read(a, "morph_size", c.aoi.morph_size, "aoi.");
        read(a, "morph_iterations", c.aoi.morph_iterations, "aoi.");
    }
    if (j.contains("patches")) {
        const json& p = j["patches"];
        reject_unknown(p, {"size", "per_class"}, "patches.");
        read(p, "size", c.patches.size, "patches.");
        read(p, "per_class", c.patches.per_class, "patches.");
    }
    c.aoi.dab_threshold = c.dab_threshold;
    c.validate();
    return c;
}

void RunConfig::validate() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::ConfigError, m); };
    for (double v : basis) {
        if (!std::isfinite(v)) fail("stain.basis must be finite");
    }
    try {
        StainBasis::from_values(basis);
    } catch (const Error& e) {
        fail(std::string("stain.basis: ") + e.what());
    }
    if (!std::isfinite(dab_threshold) || dab_threshold <= 0.0) fail("stain.dab_threshold must be > 0");
    for (const auto& s : cleanup.steps) {
        if (s.width == 0 || s.height == 0 || s.iterations == 0) fail("stain.cleanup steps need positive sizes");
    }
    try {
        ssim.validate();
    } catch (const Error& e) {
        fail(std::string("ssim: ") + e.what());
    }
    if (tile == 0 || overlap >= tile) fail("grid needs 0 <= overlap < tile");
    if (manifold_k == 0) fail("manifold_k must be >= 1");
    if (kid.subsets > 0 && kid.subset_size < 2 && kid.estimator == MmdEstimator::unbiased) {
        fail("kid.subset_size must be >= 2 for the unbiased estimator");
    }
    if (kid.subsets > 0 && kid.subset_size == 0) fail("kid.subset_size must be >= 1");
    if (tissue.morph_size == 0) fail("tissue.morph_size must be >= 1");
    if (aoi.context == 0 || aoi.morph_size == 0) fail("aoi sizes must be >= 1");
    if (patches.size == 0) fail("patches.size must be >= 1");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
    return config_from_json(j);
}

json to_json(const RunConfig& c) {
    json cleanup = json::array();
    for (const auto& s : c.cleanup.steps) {
        cleanup.push_back({{"op", s.op == MorphOp::dilate ? "dilate" : "erode"},
                           {"width", s.width},
                           {"height", s.height},
                           {"iterations", s.iterations}});
    }
    return {
        {"stain",
         {{"basis", c.basis}, {"dab_threshold", c.dab_threshold}, {"cleanup", cleanup}, {"otsu_dab", c.otsu_dab}}},
        {"ssim",
         {{"window", c.ssim.window},
          {"kind", c.ssim.kind == WindowKind::gaussian ? "gaussian" : "uniform"},
          {"sigma", c.ssim.sigma},
          {"c1", c.ssim.c1},
          {"c2", c.ssim.c2}}},
        {"grid", {{"tile", c.tile}, {"overlap", c.overlap}}},
        {"manifold_k", c.manifold_k},
        {"kid",
         {{"estimator", c.kid.estimator == MmdEstimator::unbiased ? "unbiased" : "biased"},
          {"subsets", c.kid.subsets},
          {"subset_size", c.kid.subset_size}}},
        {"seed", c.seed},
        {"positives_only", c.positives_only},
        {"allow_tag_mismatch", c.allow_tag_mismatch},
        {"tissue",
         {{"min_area", c.tissue.min_area},
          {"morph_size", c.tissue.morph_size},
          {"morph_iterations", c.tissue.morph_iterations}}},
        {"aoi",
         {{"context", c.aoi.context},
          {"tissue_threshold", c.aoi.tissue_threshold},
          {"tissue_keep_above", c.aoi.tissue_keep_above},
          {"morph_size", c.aoi.morph_size},
          {"morph_iterations", c.aoi.morph_iterations}}},
        {"patches", {{"size", c.patches.size}, {"per_class", c.patches.per_class}}},
    };
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::NumericalFailure, "SHA-256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string config_digest(const RunConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

}  // namespace vstain
