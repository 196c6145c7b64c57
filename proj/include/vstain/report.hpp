#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vstain/segmentation.hpp"
#include "vstain/stats.hpp"
#include "vstain/texture.hpp"

namespace vstain {

struct MetricRecord {
    std::string model_id;
    std::string tile_id;
    std::string group;
    std::optional<TextureScore> texture;
    std::optional<SegScore> seg;
    std::map<std::string, bool> manual_flags;
};

inline constexpr std::array<std::string_view, 8> kMetricNames = {"mse",  "psnr",      "ssim", "dice",
                                                                 "iou",  "hausdorff", "tpr",  "tnr"};

enum class MetricState { absent, sentinel, value };

struct MetricLookup {
    MetricState state = MetricState::absent;
    double value = 0.0;
};

/// PSNR of identical tiles, Hausdorff with one empty mask and undefined
/// TPR/TNR come back as sentinels. Unknown names throw InvalidArgument.
MetricLookup lookup_metric(const MetricRecord& rec, std::string_view metric);

/// Every record carries a metric family; tile ids are unique per model.
void validate_records(std::span<const MetricRecord> records);

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // n − 1 denominator; NaN when n < 2
    double median = 0.0;
    std::size_t n = 0;
    std::size_t excluded = 0;
};

/// Sorted before summation so the result does not depend on input order.
MetricSummary summarize(std::vector<double> values, std::size_t excluded = 0);

using SummaryTable = std::map<std::string, MetricSummary>;

enum class GroupBy { model, group };

std::map<std::string, SummaryTable> aggregate(std::span<const MetricRecord> records, GroupBy by = GroupBy::model);

enum class CorrelationLevel { tile, model };

std::string_view to_string(CorrelationLevel level);

struct CorrelationEntry {
    std::string x;
    std::string y;
    CorrelationLevel level = CorrelationLevel::tile;
    std::string scope;  // "models" at model level; a model id, "pooled" or "per_model_mean" at tile level
    std::optional<double> r;
    std::size_t n = 0;
    std::string error;  // set when r is undefined
};

/// One entry set per pair i < j of `metrics`. Model level correlates per-model
/// means; tile level reports each model, all tiles pooled, and the mean of
/// the per-model r values.
std::vector<CorrelationEntry> correlation_matrix(std::span<const MetricRecord> records,
                                                 std::span<const std::string> metrics, CorrelationLevel level);

struct ModelTest {
    std::string metric;
    std::string other_model;
    std::optional<TTestResult> result;
    std::string error;
};

/// Tile values of `model_id` against every other model, per metric.
std::vector<ModelTest> model_tests(std::span<const MetricRecord> records, const std::string& model_id,
                                   std::span<const std::string> metrics, TTestVariant variant = TTestVariant::welch);

/// Shortest round-trip decimal; "inf"/"-inf" for infinities, "" for NaN.
std::string format_number(double v);

std::string records_csv(std::span<const MetricRecord> records);

nlohmann::json to_json(const MetricSummary& s);
nlohmann::json to_json(const SummaryTable& table);
nlohmann::json to_json(const CorrelationEntry& c);
nlohmann::json to_json(const ModelTest& t);

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    std::string label;  // class; one marker style per distinct label
};

struct ScatterSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
};

/// Non-finite points are skipped; at least one finite point is required.
std::string scatter_svg(std::span<const ScatterPoint> points, const ScatterSpec& spec);
void render_scatter(std::span<const ScatterPoint> points, const ScatterSpec& spec, const std::filesystem::path& out);

}  // namespace vstain
