#include "vstain/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

#include "vstain/csv.hpp"
#include "vstain/errors.hpp"

namespace vstain {

MetricLookup lookup_metric(const MetricRecord& rec, std::string_view metric) {
    auto from = [](double v) {
        return std::isfinite(v) ? MetricLookup{MetricState::value, v} : MetricLookup{MetricState::sentinel, v};
    };
    auto from_opt = [](const std::optional<double>& v) {
        return v ? MetricLookup{MetricState::value, *v} : MetricLookup{MetricState::sentinel, 0.0};
    };
    if (metric == "mse" || metric == "psnr" || metric == "ssim") {
        if (!rec.texture) return {};
        if (metric == "mse") return from(rec.texture->mse);
        if (metric == "psnr") return from(rec.texture->psnr);
        return from(rec.texture->ssim);
    }
    if (metric == "dice" || metric == "iou" || metric == "hausdorff" || metric == "tpr" || metric == "tnr") {
        if (!rec.seg) return {};
        if (metric == "dice") return from(rec.seg->dice);
        if (metric == "iou") return from(rec.seg->iou);
        if (metric == "hausdorff") return from(rec.seg->hausdorff);
        if (metric == "tpr") return from_opt(rec.seg->tpr);
        return from_opt(rec.seg->tnr);
    }
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(metric) + "'");
}

void validate_records(std::span<const MetricRecord> records) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& r : records) {
        if (!r.texture && !r.seg) {
            throw Error(ErrorCode::InvalidArgument, "record '" + r.tile_id + "' has no metrics");
        }
        if (!seen.emplace(r.model_id, r.tile_id).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate tile '" + r.tile_id + "' for model '" + r.model_id + "'");
        }
    }
}

MetricSummary summarize(std::vector<double> values, std::size_t excluded) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    MetricSummary s;
    s.n = values.size();
    s.excluded = excluded;
    if (values.empty()) {
        s.mean = s.std = s.median = nan;
        return s;
    }
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / double(s.n);
    const std::size_t mid = s.n / 2;
    s.median = s.n % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    if (s.n < 2) {
        s.std = nan;
    } else {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.std = std::sqrt(ss / double(s.n - 1));
    }
    return s;
}

namespace {

struct Collected {
    std::vector<double> values;
    std::size_t excluded = 0;
    bool seen = false;
};

std::map<std::string, std::vector<const MetricRecord*>> by_model(std::span<const MetricRecord> records) {
    std::map<std::string, std::vector<const MetricRecord*>> out;
    for (const auto& r : records) out[r.model_id].push_back(&r);
    return out;
}

SummaryTable summarize_records(std::span<const MetricRecord* const> records) {
    SummaryTable table;
    for (auto name : kMetricNames) {
        Collected c;
        for (const auto* r : records) {
            const auto m = lookup_metric(*r, name);
            if (m.state == MetricState::absent) continue;
            c.seen = true;
            if (m.state == MetricState::sentinel) {
                ++c.excluded;
            } else {
                c.values.push_back(m.value);
            }
        }
        if (c.seen) table.emplace(std::string(name), summarize(std::move(c.values), c.excluded));
    }
    return table;
}

}  // namespace

std::map<std::string, SummaryTable> aggregate(std::span<const MetricRecord> records, GroupBy by) {
    if (records.empty()) throw Error(ErrorCode::Empty, "no records to aggregate");
    validate_records(records);
    std::map<std::string, std::vector<const MetricRecord*>> groups;
    for (const auto& r : records) groups[by == GroupBy::model ? r.model_id : r.group].push_back(&r);
    std::map<std::string, SummaryTable> out;
    for (const auto& [key, members] : groups) out.emplace(key, summarize_records(members));
    return out;
}

std::string_view to_string(CorrelationLevel level) { return level == CorrelationLevel::tile ? "tile" : "model"; }

namespace {

CorrelationEntry correlate(const std::string& x, const std::string& y, CorrelationLevel level, std::string scope,
                           const std::vector<double>& xs, const std::vector<double>& ys) {
    CorrelationEntry e{x, y, level, std::move(scope), std::nullopt, xs.size(), {}};
    try {
        e.r = pearson(xs, ys);
    } catch (const Error& err) {
        e.error = std::string(vstain::to_string(err.code()));
    }
    return e;
}

void paired_values(std::span<const MetricRecord* const> records, const std::string& x, const std::string& y,
                   std::vector<double>& xs, std::vector<double>& ys) {
    for (const auto* r : records) {
        const auto a = lookup_metric(*r, x);
        const auto b = lookup_metric(*r, y);
        if (a.state == MetricState::value && b.state == MetricState::value) {
            xs.push_back(a.value);
            ys.push_back(b.value);
        }
    }
}

}  // namespace

std::vector<CorrelationEntry> correlation_matrix(std::span<const MetricRecord> records,
                                                 std::span<const std::string> metrics, CorrelationLevel level) {
    validate_records(records);
    for (const auto& m : metrics) {
        if (std::find(kMetricNames.begin(), kMetricNames.end(), m) == kMetricNames.end()) {
            throw Error(ErrorCode::InvalidArgument, "unknown metric '" + m + "'");
        }
    }
    const auto models = by_model(records);
    std::vector<CorrelationEntry> out;

    if (level == CorrelationLevel::model) {
        std::map<std::string, SummaryTable> tables;
        for (const auto& [id, members] : models) tables.emplace(id, summarize_records(members));
        for (std::size_t i = 0; i < metrics.size(); ++i) {
            for (std::size_t j = i + 1; j < metrics.size(); ++j) {
                std::vector<double> xs;
                std::vector<double> ys;
                for (const auto& [id, table] : tables) {
                    const auto a = table.find(metrics[i]);
                    const auto b = table.find(metrics[j]);
                    if (a == table.end() || b == table.end() || a->second.n == 0 || b->second.n == 0) continue;
                    xs.push_back(a->second.mean);
                    ys.push_back(b->second.mean);
                }
                out.push_back(correlate(metrics[i], metrics[j], level, "models", xs, ys));
            }
        }
        return out;
    }

    std::vector<const MetricRecord*> all;
    for (const auto& r : records) all.push_back(&r);
    for (std::size_t i = 0; i < metrics.size(); ++i) {
        for (std::size_t j = i + 1; j < metrics.size(); ++j) {
            std::vector<double> rs;
            for (const auto& [id, members] : models) {
                std::vector<double> xs;
                std::vector<double> ys;
                paired_values(members, metrics[i], metrics[j], xs, ys);
                auto e = correlate(metrics[i], metrics[j], level, id, xs, ys);
                if (e.r) rs.push_back(*e.r);
                out.push_back(std::move(e));
            }
            std::vector<double> xs;
            std::vector<double> ys;
            paired_values(all, metrics[i], metrics[j], xs, ys);
            out.push_back(correlate(metrics[i], metrics[j], level, "pooled", xs, ys));

            CorrelationEntry mean_entry{metrics[i], metrics[j], level, "per_model_mean", std::nullopt, rs.size(), {}};
            if (rs.empty()) {
                mean_entry.error = "no per-model r defined";
            } else {
                double s = 0.0;
                for (double r : rs) s += r;
                mean_entry.r = s / double(rs.size());
            }
            out.push_back(std::move(mean_entry));
        }
    }
    return out;
}

std::vector<ModelTest> model_tests(std::span<const MetricRecord> records, const std::string& model_id,
                                   std::span<const std::string> metrics, TTestVariant variant) {
    const auto models = by_model(records);
    const auto self = models.find(model_id);
    if (self == models.end()) throw Error(ErrorCode::InvalidArgument, "unknown model '" + model_id + "'");
    auto values_of = [](std::span<const MetricRecord* const> members, const std::string& metric) {
        std::vector<double> v;
        for (const auto* r : members) {
            const auto m = lookup_metric(*r, metric);
            if (m.state == MetricState::value) v.push_back(m.value);
        }
        return v;
    };
    std::vector<ModelTest> out;
    for (const auto& metric : metrics) {
        const auto a = values_of(self->second, metric);
        for (const auto& [other, members] : models) {
            if (other == model_id) continue;
            ModelTest t{metric, other, std::nullopt, {}};
            try {
                t.result = ttest(a, values_of(members, metric), variant);
            } catch (const Error& err) {
                t.error = std::string(vstain::to_string(err.code()));
            }
            out.push_back(std::move(t));
        }
    }
    return out;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

nlohmann::json number_or_null(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

}  // namespace

std::string records_csv(std::span<const MetricRecord> records) {
    std::string out =
        "model_id,tile_id,group,mse,psnr,ssim,dice,iou,hausdorff,tpr,tnr,gt_positive,pred_positive,manual_flags\n";
    for (const auto& r : records) {
        std::string flags;
        for (const auto& [label, value] : r.manual_flags) {
            if (!flags.empty()) flags += ';';
            flags += label + "=" + (value ? "1" : "0");
        }
        out += csv_escape(r.model_id) + ',' + csv_escape(r.tile_id) + ',' + csv_escape(r.group) + ',';
        if (r.texture) {
            out += format_number(r.texture->mse) + ',' + format_number(r.texture->psnr) + ',' +
                   format_number(r.texture->ssim) + ',';
        } else {
            out += ",,,";
        }
        if (r.seg) {
            out += format_number(r.seg->dice) + ',' + format_number(r.seg->iou) + ',' +
                   format_number(r.seg->hausdorff) + ',' + optional_number(r.seg->tpr) + ',' +
                   optional_number(r.seg->tnr) + ',' + std::to_string(r.seg->gt_positive) + ',' +
                   std::to_string(r.seg->pred_positive) + ',';
        } else {
            out += ",,,,,,,";
        }
        out += csv_escape(flags) + '\n';
    }
    return out;
}

nlohmann::json to_json(const MetricSummary& s) {
    return {{"mean", number_or_null(s.mean)},
            {"std", number_or_null(s.std)},
            {"median", number_or_null(s.median)},
            {"n", s.n},
            {"excluded", s.excluded}};
}

nlohmann::json to_json(const SummaryTable& table) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [metric, s] : table) j[metric] = to_json(s);
    return j;
}

nlohmann::json to_json(const CorrelationEntry& c) {
    nlohmann::json j{{"x", c.x},
                     {"y", c.y},
                     {"level", std::string(to_string(c.level))},
                     {"scope", c.scope},
                     {"n", c.n},
                     {"r", c.r ? nlohmann::json(*c.r) : nlohmann::json(nullptr)}};
    if (!c.error.empty()) j["error"] = c.error;
    return j;
}

nlohmann::json to_json(const ModelTest& t) {
    nlohmann::json j{{"metric", t.metric}, {"against", t.other_model}};
    if (t.result) {
        j["t"] = t.result->t;
        j["dof"] = t.result->dof;
        j["p"] = t.result->p;
        j["n_a"] = t.result->n_a;
        j["n_b"] = t.result->n_b;
    } else {
        j["error"] = t.error;
    }
    return j;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string marker(const char* role, std::size_t style, double x, double y) {
    const std::string color = kPalette[style % kPalette.size()];
    const std::string cls = std::string(role) + " s" + std::to_string(style);
    switch (style % 4) {
        case 0:
            return "<circle class=\"" + cls + "\" cx=\"" + fmt("%.2f", x) + "\" cy=\"" + fmt("%.2f", y) +
                   "\" r=\"4\" fill=\"" + color + "\"/>";
        case 1:
            return "<rect class=\"" + cls + "\" x=\"" + fmt("%.2f", x - 4) + "\" y=\"" + fmt("%.2f", y - 4) +
                   "\" width=\"8\" height=\"8\" fill=\"" + color + "\"/>";
        case 2:
            return "<polygon class=\"" + cls + "\" points=\"" + fmt("%.2f", x) + "," + fmt("%.2f", y - 5) + " " +
                   fmt("%.2f", x - 4.5) + "," + fmt("%.2f", y + 4) + " " + fmt("%.2f", x + 4.5) + "," +
                   fmt("%.2f", y + 4) + "\" fill=\"" + color + "\"/>";
        default:
            return "<polygon class=\"" + cls + "\" points=\"" + fmt("%.2f", x) + "," + fmt("%.2f", y - 5) + " " +
                   fmt("%.2f", x + 5) + "," + fmt("%.2f", y) + " " + fmt("%.2f", x) + "," + fmt("%.2f", y + 5) +
                   " " + fmt("%.2f", x - 5) + "," + fmt("%.2f", y) + "\" fill=\"" + color + "\"/>";
    }
}

struct Axis {
    double lo;
    double hi;
};

Axis padded(double lo, double hi) {
    if (hi - lo <= 0.0) return {lo - 0.5, hi + 0.5};
    const double pad = 0.05 * (hi - lo);
    return {lo - pad, hi + pad};
}

}  // namespace

std::string scatter_svg(std::span<const ScatterPoint> points, const ScatterSpec& spec) {
    std::vector<const ScatterPoint*> finite;
    for (const auto& p : points) {
        if (std::isfinite(p.x) && std::isfinite(p.y)) finite.push_back(&p);
    }
    if (finite.empty()) throw Error(ErrorCode::InvalidArgument, "scatter plot needs at least one finite point");

    std::set<std::string> label_set;
    double x0 = finite[0]->x, x1 = x0, y0 = finite[0]->y, y1 = y0;
    for (const auto* p : finite) {
        label_set.insert(p->label);
        x0 = std::min(x0, p->x);
        x1 = std::max(x1, p->x);
        y0 = std::min(y0, p->y);
        y1 = std::max(y1, p->y);
    }
    const std::vector<std::string> labels(label_set.begin(), label_set.end());
    const Axis ax = padded(x0, x1);
    const Axis ay = padded(y0, y1);

    constexpr double W = 640, H = 480, left = 80, right = 160, top = 40, bottom = 60;
    const double pw = W - left - right;
    const double ph = H - top - bottom;
    auto sx = [&](double v) { return left + (v - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto sy = [&](double v) { return top + ph - (v - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" viewBox=\"0 0 640 480\" "
         "font-family=\"sans-serif\" font-size=\"11\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"white\"/>\n";
    s += "<text x=\"" + fmt("%.2f", left + pw / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
         xml_escape(spec.title) + "</text>\n";
    s += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    s += "<line x1=\"" + fmt("%.2f", left) + "\" y1=\"" + fmt("%.2f", top + ph) + "\" x2=\"" + fmt("%.2f", left + pw) +
         "\" y2=\"" + fmt("%.2f", top + ph) + "\"/>\n";
    s += "<line x1=\"" + fmt("%.2f", left) + "\" y1=\"" + fmt("%.2f", top) + "\" x2=\"" + fmt("%.2f", left) +
         "\" y2=\"" + fmt("%.2f", top + ph) + "\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double vx = ax.lo + (ax.hi - ax.lo) * k / 4.0;
        const double vy = ay.lo + (ay.hi - ay.lo) * k / 4.0;
        s += "<line x1=\"" + fmt("%.2f", sx(vx)) + "\" y1=\"" + fmt("%.2f", top + ph) + "\" x2=\"" +
             fmt("%.2f", sx(vx)) + "\" y2=\"" + fmt("%.2f", top + ph + 5) + "\"/>\n";
        s += "<line x1=\"" + fmt("%.2f", left - 5) + "\" y1=\"" + fmt("%.2f", sy(vy)) + "\" x2=\"" +
             fmt("%.2f", left) + "\" y2=\"" + fmt("%.2f", sy(vy)) + "\"/>\n";
    }
    s += "</g>\n<g class=\"ticks\">\n";
    for (int k = 0; k <= 4; ++k) {
        const double vx = ax.lo + (ax.hi - ax.lo) * k / 4.0;
        const double vy = ay.lo + (ay.hi - ay.lo) * k / 4.0;
        s += "<text x=\"" + fmt("%.2f", sx(vx)) + "\" y=\"" + fmt("%.2f", top + ph + 18) +
             "\" text-anchor=\"middle\">" + fmt("%.4g", vx) + "</text>\n";
        s += "<text x=\"" + fmt("%.2f", left - 8) + "\" y=\"" + fmt("%.2f", sy(vy) + 4) +
             "\" text-anchor=\"end\">" + fmt("%.4g", vy) + "</text>\n";
    }
    s += "</g>\n";
    s += "<text x=\"" + fmt("%.2f", left + pw / 2) + "\" y=\"" + fmt("%.2f", H - 16) + "\" text-anchor=\"middle\">" +
         xml_escape(spec.x_label) + "</text>\n";
    s += "<text x=\"18\" y=\"" + fmt("%.2f", top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         fmt("%.2f", top + ph / 2) + ")\">" + xml_escape(spec.y_label) + "</text>\n";

    s += "<g class=\"points\">\n";
    for (const auto* p : finite) {
        const auto style = std::size_t(std::lower_bound(labels.begin(), labels.end(), p->label) - labels.begin());
        s += marker("marker", style, sx(p->x), sy(p->y)) + "\n";
    }
    s += "</g>\n<g class=\"legend\">\n";
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double ly = top + 10 + 18.0 * double(i);
        s += marker("swatch", i, W - right + 20, ly) + "\n";
        s += "<text x=\"" + fmt("%.2f", W - right + 32) + "\" y=\"" + fmt("%.2f", ly + 4) + "\">" +
             xml_escape(labels[i]) + "</text>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

void render_scatter(std::span<const ScatterPoint> points, const ScatterSpec& spec, const std::filesystem::path& out) {
    const std::string svg = scatter_svg(points, spec);
    std::ofstream f(out, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(ErrorCode::IoError, "cannot open " + out.string() + " for writing");
    f << svg;
    if (!f) throw Error(ErrorCode::IoError, "write failed: " + out.string());
}

}  // namespace vstain
