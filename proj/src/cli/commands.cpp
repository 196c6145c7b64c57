#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "vstain/cli.hpp"
#include "vstain/csv.hpp"
#include "vstain/distribution.hpp"
#include "vstain/errors.hpp"
#include "vstain/feature_io.hpp"
#include "vstain/image_io.hpp"
#include "vstain/parallel.hpp"
#include "vstain/report.hpp"
#include "vstain/segmentation.hpp"
#include "vstain/simd/kernels.hpp"
#include "vstain/texture.hpp"

namespace vstain::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kCorrelationMetrics = {"mse", "psnr", "ssim", "dice", "iou", "hausdorff"};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + p.string() + " for writing");
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

void ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + p.string() + ": " + ec.message());
}

void write_metadata(const fs::path& dir, const std::string& command, const std::string& run_id,
                    const std::string& started) {
    write_json(dir / "metadata.json", {{"command", command},
                                       {"run_id", run_id},
                                       {"started_at", started},
                                       {"finished_at", utc_now()},
                                       {"workers", worker_count()},
                                       {"simd", std::string(simd::to_string(simd::active().backend))}});
}

fs::path resolve(const fs::path& base_dir, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
}

std::map<std::string, bool> parse_flags(const std::string& text) {
    std::map<std::string, bool> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ';')) {
        if (token.empty()) continue;
        const auto eq = token.find('=');
        if (eq == std::string::npos) {
            out[token] = true;
            continue;
        }
        const std::string key = token.substr(0, eq);
        const std::string value = token.substr(eq + 1);
        if (value == "1" || value == "true" || value == "yes") {
            out[key] = true;
        } else if (value == "0" || value == "false" || value == "no") {
            out[key] = false;
        } else {
            throw Error(ErrorCode::InvalidArgument, "manual flag '" + token + "' is not boolean");
        }
    }
    return out;
}

std::string safe_name(const std::string& s) {
    std::string out;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                        c == '_' || c == '.';
        out += ok ? c : '_';
    }
    return out.empty() || out == "." || out == ".." ? "_" : out;
}

// ---- eval / report ----

struct PairJob {
    std::size_t row = 0;
    std::string model_id;
    std::string tile_id;
    std::string group;
    fs::path real;
    fs::path virt;
    std::optional<fs::path> real_mask;
    std::optional<fs::path> virt_mask;
    std::map<std::string, bool> flags;
};

std::vector<PairJob> load_pair_manifest(const fs::path& path, const std::string& default_model) {
    const CsvTable t = read_csv(path);
    for (const char* required : {"tile_id", "real_path", "virtual_path"}) {
        if (!t.column(required)) {
            throw Error(ErrorCode::InvalidArgument, "manifest lacks column '" + std::string(required) + "'");
        }
    }
    if (t.rows.empty()) throw Error(ErrorCode::Empty, "manifest has no rows");
    const fs::path base = path.parent_path();
    auto get = [&](const std::vector<std::string>& row, const char* name) -> std::string {
        const auto c = t.column(name);
        return c ? row[*c] : std::string();
    };
    std::vector<PairJob> jobs;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        PairJob j;
        j.row = i;
        j.model_id = get(row, "model_id");
        if (j.model_id.empty()) j.model_id = default_model;
        j.tile_id = get(row, "tile_id");
        if (j.tile_id.empty()) throw Error(ErrorCode::InvalidArgument, "row " + std::to_string(i + 1) + ": empty tile_id");
        if (!seen.emplace(j.model_id, j.tile_id).second) {
            throw Error(ErrorCode::InvalidArgument, "duplicate tile_id '" + j.tile_id + "'");
        }
        j.group = get(row, "group");
        j.real = resolve(base, get(row, "real_path"));
        j.virt = resolve(base, get(row, "virtual_path"));
        if (const auto m = get(row, "real_mask_path"); !m.empty()) j.real_mask = resolve(base, m);
        if (const auto m = get(row, "virtual_mask_path"); !m.empty()) j.virt_mask = resolve(base, m);
        j.flags = parse_flags(get(row, "manual_flags"));
        jobs.push_back(std::move(j));
    }
    return jobs;
}

MetricRecord score_job(const PairJob& job, const RunConfig& cfg, const StainBasis& basis) {
    const ImageTile real = read_image(job.real);
    const ImageTile virt = read_image(job.virt);
    if (real.width() != virt.width() || real.height() != virt.height()) {
        throw Error(ErrorCode::DimensionMismatch, "real and virtual tiles differ in size");
    }
    MetricRecord rec;
    rec.model_id = job.model_id;
    rec.tile_id = job.tile_id;
    rec.group = job.group;
    rec.manual_flags = job.flags;
    rec.texture = score_texture(real, virt, cfg.ssim);

    const double threshold = cfg.otsu_dab ? dab_otsu_threshold(real, basis) : cfg.dab_threshold;
    const BinaryMask gt = job.real_mask ? read_mask(*job.real_mask) : dab_mask(real, basis, threshold, cfg.cleanup);
    const BinaryMask pred = job.virt_mask ? read_mask(*job.virt_mask) : dab_mask(virt, basis, threshold, cfg.cleanup);
    rec.seg = score_pair(gt, pred);
    return rec;
}

std::vector<ScatterPoint> tile_points(std::span<const MetricRecord> records, const std::string& x,
                                      const std::string& y) {
    std::vector<ScatterPoint> pts;
    for (const auto& r : records) {
        const auto a = lookup_metric(r, x);
        const auto b = lookup_metric(r, y);
        if (a.state == MetricState::value && b.state == MetricState::value) pts.push_back({a.value, b.value, r.model_id});
    }
    return pts;
}

// Build report.json plus plots; `records` are all scored tiles in manifest order.
json build_report(const Context& ctx, std::span<const MetricRecord> records, const std::string& run_id,
                  const json& failures, const fs::path& out_dir) {
    const RunConfig& cfg = ctx.config;

    // Analysis view: with positives_only, tiles without ground-truth positives
    // do not enter segmentation aggregates.
    std::vector<MetricRecord> analysis;
    std::map<std::string, std::size_t> seg_skipped;
    for (const auto& r : records) {
        MetricRecord copy = r;
        if (cfg.positives_only && copy.seg && copy.seg->gt_positive == 0) {
            copy.seg.reset();
            ++seg_skipped[r.model_id];
        }
        if (copy.texture || copy.seg) analysis.push_back(std::move(copy));
    }

    json report;
    report["run_id"] = run_id;
    report["config_digest"] = ctx.digest;
    report["config"] = to_json(cfg);
    report["failures"] = failures;
    report["models"] = json::array();
    report["correlations"] = json::array();
    report["plots"] = json::array();
    if (analysis.empty()) return report;

    const auto by_model = aggregate(analysis, GroupBy::model);
    const auto tile_corr = correlation_matrix(analysis, kCorrelationMetrics, CorrelationLevel::tile);
    const auto model_corr = correlation_matrix(analysis, kCorrelationMetrics, CorrelationLevel::model);
    const std::vector<std::string> all_metrics(kMetricNames.begin(), kMetricNames.end());

    for (const auto& [model_id, table] : by_model) {
        std::vector<MetricRecord> mine;
        for (const auto& r : analysis) {
            if (r.model_id == model_id) mine.push_back(r);
        }
        json entry{{"model_id", model_id},
                   {"n_tiles", mine.size()},
                   {"seg_excluded_empty_gt", seg_skipped[model_id]},
                   {"aggregates", to_json(table)}};
        json groups = json::object();
        for (const auto& [group, gtable] : aggregate(mine, GroupBy::group)) groups[group] = to_json(gtable);
        entry["aggregates_by_group"] = groups;
        entry["correlations"] = json::array();
        for (const auto& c : tile_corr) {
            if (c.scope == model_id) entry["correlations"].push_back(to_json(c));
        }
        entry["tests"] = json::array();
        for (const auto& t : model_tests(analysis, model_id, all_metrics)) entry["tests"].push_back(to_json(t));
        report["models"].push_back(std::move(entry));
    }
    for (const auto& c : model_corr) report["correlations"].push_back(to_json(c));
    for (const auto& c : tile_corr) {
        if (c.scope == "pooled" || c.scope == "per_model_mean") report["correlations"].push_back(to_json(c));
    }

    const std::vector<std::pair<std::string, std::string>> plots = {{"psnr", "dice"}, {"ssim", "dice"}};
    for (const auto& [x, y] : plots) {
        const auto pts = tile_points(analysis, x, y);
        const std::string name = x + "_vs_" + y + ".svg";
        if (pts.empty()) {
            ctx.warn("no finite points for " + name + ", plot skipped");
            continue;
        }
        render_scatter(pts, {"Tile " + y + " vs " + x, x, y}, out_dir / name);
        report["plots"].push_back(name);
    }
    std::vector<ScatterPoint> means;
    for (const auto& [model_id, table] : by_model) {
        const auto a = table.find("psnr");
        const auto b = table.find("dice");
        if (a != table.end() && b != table.end() && a->second.n > 0 && b->second.n > 0) {
            means.push_back({a->second.mean, b->second.mean, model_id});
        }
    }
    if (!means.empty()) {
        render_scatter(means, {"Model mean dice vs psnr", "psnr", "dice"}, out_dir / "model_psnr_vs_dice.svg");
        report["plots"].push_back("model_psnr_vs_dice.svg");
    }
    return report;
}

std::optional<double> parse_optional_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size()) throw Error(ErrorCode::CorruptFile, "not a number: '" + s + "'");
    return v;
}

std::vector<MetricRecord> load_records(const fs::path& path) {
    const CsvTable t = read_csv(path);
    const std::vector<std::string> cols = {"model_id", "tile_id", "group", "mse", "psnr", "ssim", "dice",
                                           "iou", "hausdorff", "tpr", "tnr", "gt_positive", "pred_positive",
                                           "manual_flags"};
    std::map<std::string, std::size_t> at;
    for (const auto& c : cols) {
        const auto i = t.column(c);
        if (!i) throw Error(ErrorCode::InvalidArgument, "records file lacks column '" + c + "'");
        at[c] = *i;
    }
    std::vector<MetricRecord> out;
    for (const auto& row : t.rows) {
        MetricRecord r;
        r.model_id = row[at["model_id"]];
        r.tile_id = row[at["tile_id"]];
        r.group = row[at["group"]];
        r.manual_flags = parse_flags(row[at["manual_flags"]]);
        const auto mse = parse_optional_number(row[at["mse"]]);
        if (mse) {
            r.texture = TextureScore{*mse, parse_optional_number(row[at["psnr"]]).value_or(kPsnrIdentical),
                                     parse_optional_number(row[at["ssim"]]).value_or(1.0)};
        }
        const auto dice = parse_optional_number(row[at["dice"]]);
        if (dice) {
            SegScore s;
            s.dice = *dice;
            s.iou = parse_optional_number(row[at["iou"]]).value_or(0.0);
            s.hausdorff = parse_optional_number(row[at["hausdorff"]]).value_or(kHausdorffUndefined);
            s.tpr = parse_optional_number(row[at["tpr"]]);
            s.tnr = parse_optional_number(row[at["tnr"]]);
            s.gt_positive = std::size_t(parse_optional_number(row[at["gt_positive"]]).value_or(0.0));
            s.pred_positive = std::size_t(parse_optional_number(row[at["pred_positive"]]).value_or(0.0));
            s.both_empty = s.gt_positive == 0 && s.pred_positive == 0;
            r.seg = s;
        }
        out.push_back(std::move(r));
    }
    return out;
}

json grid_to_json(const TileGrid& g) {
    json origins = json::array();
    for (const auto& o : g.origins) origins.push_back({o.x, o.y});
    return {{"width", g.width}, {"height", g.height}, {"tile", g.tile}, {"overlap", g.overlap}, {"origins", origins}};
}

TileGrid grid_from_json(const json& j) {
    try {
        TileGrid g;
        g.width = j.at("width").get<std::size_t>();
        g.height = j.at("height").get<std::size_t>();
        g.tile = j.at("tile").get<std::size_t>();
        g.overlap = j.at("overlap").get<std::size_t>();
        for (const auto& o : j.at("origins")) {
            if (!o.is_array() || o.size() != 2) throw Error(ErrorCode::CorruptFile, "origin must be [x, y]");
            g.origins.push_back({o[0].get<std::size_t>(), o[1].get<std::size_t>()});
        }
        validate_grid(g);
        return g;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::CorruptFile, std::string("grid description: ") + e.what());
    }
}

std::string tile_name(const Origin& o) {
    return "tile_x" + std::to_string(o.x) + "_y" + std::to_string(o.y) + ".png";
}

}  // namespace

int cmd_eval(const Context& ctx, const EvalArgs& args) {
    const std::string started = utc_now();
    std::vector<PairJob> jobs;
    try {
        jobs = load_pair_manifest(args.manifest, args.model);
    } catch (const Error& e) {
        ctx.err << "error: " << args.manifest.string() << ": " << e.what() << '\n';
        return kExitUsage;
    }
    ensure_dir(args.out);
    const StainBasis basis = StainBasis::from_values(ctx.config.basis);

    std::vector<std::optional<MetricRecord>> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        try {
            results[i] = score_job(jobs[i], ctx.config, basis);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    std::vector<MetricRecord> records;
    json failures = json::array();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        if (results[i]) {
            records.push_back(std::move(*results[i]));
        } else {
            failures.push_back({{"row", jobs[i].row + 1}, {"tile_id", jobs[i].tile_id}, {"error", errors[i]}});
            ctx.warn("tile " + jobs[i].tile_id + ": " + errors[i]);
        }
    }
    ctx.log("scored " + std::to_string(records.size()) + " of " + std::to_string(jobs.size()) + " pairs");

    const std::string run_id = sha256_hex(ctx.digest + "\n" + sha256_hex(read_file(args.manifest))).substr(0, 16);
    write_text(args.out / "records.csv", records_csv(records));
    write_json(args.out / "report.json", build_report(ctx, records, run_id, failures, args.out));
    write_metadata(args.out, "eval", run_id, started);
    return failures.empty() ? kExitOk : kExitPartial;
}

int cmd_report(const Context& ctx, const ReportArgs& args) {
    const std::string started = utc_now();
    std::vector<MetricRecord> records;
    try {
        records = load_records(args.records);
        validate_records(records);
    } catch (const Error& e) {
        ctx.err << "error: " << args.records.string() << ": " << e.what() << '\n';
        return kExitUsage;
    }
    if (records.empty()) {
        ctx.err << "error: " << args.records.string() << " has no records\n";
        return kExitUsage;
    }
    ensure_dir(args.out);
    const std::string run_id = sha256_hex(ctx.digest + "\n" + sha256_hex(read_file(args.records))).substr(0, 16);
    write_json(args.out / "report.json", build_report(ctx, records, run_id, json::array(), args.out));
    write_metadata(args.out, "report", run_id, started);
    return kExitOk;
}

int cmd_dist(const Context& ctx, const DistArgs& args) {
    FeatureSet real = read_features(args.real);
    FeatureSet virt = read_features(args.virt);
    if (real.encoder_tag() != virt.encoder_tag() && !ctx.config.allow_tag_mismatch) {
        ctx.err << "error: encoder tags differ ('" << real.encoder_tag() << "' vs '" << virt.encoder_tag()
                << "'); pass --allow-tag-mismatch to compare anyway\n";
        return kExitUsage;
    }
    if (real.d() != virt.d()) {
        ctx.err << "error: feature dimensions differ (" << real.d() << " vs " << virt.d() << ")\n";
        return kExitUsage;
    }
    const RunConfig& cfg = ctx.config;
    json result{{"n_real", real.n()},
                {"n_virtual", virt.n()},
                {"d", real.d()},
                {"encoder_tag", real.encoder_tag()},
                {"virtual_encoder_tag", virt.encoder_tag()},
                {"k", cfg.manifold_k},
                {"kid_estimator", cfg.kid.estimator == MmdEstimator::unbiased ? "unbiased" : "biased"},
                {"config_digest", ctx.digest}};
    json errors = json::object();
    auto attempt = [&](const char* name, auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            errors[name] = e.what();
        }
    };
    result["frechet"] = nullptr;
    result["kid"] = nullptr;
    result["kid_x1000"] = nullptr;
    result["precision"] = nullptr;
    result["recall"] = nullptr;
    attempt("frechet", [&] { result["frechet"] = frechet_distance(moments(real), moments(virt)); });
    attempt("kid", [&] {
        std::optional<KidSubsets> subsets;
        if (cfg.kid.subsets > 0) subsets = KidSubsets{cfg.kid.subsets, cfg.kid.subset_size, cfg.seed};
        const double kid = kernel_distance(real, virt, cfg.kid.estimator, subsets);
        result["kid"] = kid;
        result["kid_x1000"] = kid * 1000.0;
    });
    attempt("precision_recall", [&] {
        const auto pr = precision_recall(real, virt, cfg.manifold_k);
        result["precision"] = pr.precision;
        result["recall"] = pr.recall;
    });
    if (!errors.empty()) result["errors"] = errors;
    const std::string text = result.dump(2) + "\n";
    if (args.out) {
        if (args.out->has_parent_path()) ensure_dir(args.out->parent_path());
        write_text(*args.out, text);
    } else {
        ctx.out << text;
    }
    for (const auto& [name, msg] : errors.items()) ctx.warn(name + ": " + msg.get<std::string>());
    return errors.empty() ? kExitOk : kExitPartial;
}

int cmd_prep(const Context& ctx, const PrepArgs& args) {
    struct Slide {
        std::string group;
        fs::path he;
        fs::path ihc;
    };
    std::vector<Slide> slides;
    try {
        if (args.slides) {
            const CsvTable t = read_csv(*args.slides);
            for (const char* c : {"group", "he_path", "ihc_path"}) {
                if (!t.column(c)) throw Error(ErrorCode::InvalidArgument, "slides file lacks column '" + std::string(c) + "'");
            }
            const fs::path base = args.slides->parent_path();
            for (const auto& row : t.rows) {
                slides.push_back({row[*t.column("group")], resolve(base, row[*t.column("he_path")]),
                                  resolve(base, row[*t.column("ihc_path")])});
            }
        } else if (args.he && args.ihc) {
            slides.push_back({args.group, *args.he, *args.ihc});
        } else {
            throw Error(ErrorCode::InvalidArgument, "give --slides, or both --he and --ihc");
        }
        if (slides.empty()) throw Error(ErrorCode::Empty, "no slides listed");
    } catch (const Error& e) {
        ctx.err << "error: " << e.what() << '\n';
        return kExitUsage;
    }

    const RunConfig& cfg = ctx.config;
    const StainBasis basis = StainBasis::from_values(cfg.basis);
    ensure_dir(args.out);
    std::string manifest = "group,polarity,x,y,size,he_path,ihc_path\n";
    json slide_reports = json::array();
    std::map<std::string, std::pair<std::size_t, std::size_t>> balance;
    bool data_errors = false;

    for (std::size_t i = 0; i < slides.size(); ++i) {
        const Slide& s = slides[i];
        json entry{{"index", i}, {"group", s.group}, {"he_path", s.he.string()}, {"ihc_path", s.ihc.string()}};
        balance.try_emplace(s.group, 0, 0);
        try {
            const ImageTile he = read_image(s.he);
            const ImageTile ihc = read_image(s.ihc);
            if (he.width() != ihc.width() || he.height() != ihc.height()) {
                throw Error(ErrorCode::DimensionMismatch, "H&E and IHC images differ in size");
            }
            json boxes = json::array();
            for (const auto& b : tissue_boxes(he, cfg.tissue)) boxes.push_back({{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}});
            entry["tissue_boxes"] = boxes;

            const AoiPair aoi = areas_of_interest(ihc, basis, cfg.aoi);
            entry["positive_area"] = aoi.positive.count();
            entry["negative_area"] = aoi.negative.count();
            const std::string stem = "s" + std::to_string(i);
            ensure_dir(args.out / "aoi");
            write_mask(args.out / "aoi" / (stem + "_positive.png"), aoi.positive);
            write_mask(args.out / "aoi" / (stem + "_negative.png"), aoi.negative);

            std::vector<PatchSpec> patches;
            try {
                patches = sample_patches(aoi, cfg.patches.per_class, cfg.patches.size, cfg.seed + i);
            } catch (const Error& e) {
                if (e.code() != ErrorCode::InsufficientArea) throw;
                entry["warning"] = e.what();
                ctx.warn("slide " + std::to_string(i) + " (" + s.group + "): " + e.what() + "; no patches taken");
            }
            const fs::path dir = fs::path("patches") / safe_name(s.group);
            if (!patches.empty()) ensure_dir(args.out / dir);
            std::size_t npos = 0, nneg = 0;
            for (const auto& p : patches) {
                const std::string base = stem + "_" + to_string(p.polarity) + "_x" + std::to_string(p.x) + "_y" +
                                         std::to_string(p.y);
                const fs::path he_rel = dir / (base + "_he.png");
                const fs::path ihc_rel = dir / (base + "_ihc.png");
                write_image(args.out / he_rel, he.crop(p.x, p.y, p.size, p.size));
                write_image(args.out / ihc_rel, ihc.crop(p.x, p.y, p.size, p.size));
                manifest += csv_escape(s.group) + "," + to_string(p.polarity) + "," + std::to_string(p.x) + "," +
                            std::to_string(p.y) + "," + std::to_string(p.size) + "," +
                            csv_escape(he_rel.generic_string()) + "," + csv_escape(ihc_rel.generic_string()) + "\n";
                (p.polarity == Polarity::positive ? npos : nneg) += 1;
            }
            entry["positive_patches"] = npos;
            entry["negative_patches"] = nneg;
            balance[s.group].first += npos;
            balance[s.group].second += nneg;
        } catch (const Error& e) {
            data_errors = true;
            entry["error"] = e.what();
            ctx.warn("slide " + std::to_string(i) + " (" + s.group + "): " + e.what());
        }
        slide_reports.push_back(std::move(entry));
    }

    json groups = json::object();
    for (const auto& [g, counts] : balance) groups[g] = {{"positive", counts.first}, {"negative", counts.second}};
    write_text(args.out / "manifest.csv", manifest);
    write_json(args.out / "prep_report.json",
               {{"config_digest", ctx.digest}, {"config", to_json(cfg)}, {"slides", slide_reports}, {"groups", groups}});
    ctx.log("prep: " + std::to_string(slides.size()) + " slides processed");
    return data_errors ? kExitPartial : kExitOk;
}

int cmd_tile(const Context& ctx, const TileArgs& args) {
    const ImageTile img = read_image(args.image);
    const TileGrid grid = make_grid(img.width(), img.height(), ctx.config.tile, ctx.config.overlap);
    ensure_dir(args.out);
    for (const auto& t : extract_tiles(img, grid)) write_image(args.out / tile_name(t.origin), t.tile);
    json g = grid_to_json(grid);
    g["config_digest"] = ctx.digest;
    write_json(args.out / "grid.json", g);
    ctx.log("wrote " + std::to_string(grid.origins.size()) + " tiles");
    return kExitOk;
}

int cmd_stitch(const Context& ctx, const StitchArgs& args) {
    TileGrid grid;
    try {
        grid = grid_from_json(json::parse(read_file(args.grid)));
    } catch (const json::parse_error& e) {
        ctx.err << "error: " << args.grid.string() << ": " << e.what() << '\n';
        return kExitUsage;
    }
    std::vector<Origin> missing;
    for (const auto& o : grid.origins) {
        if (!fs::exists(args.tiles / tile_name(o))) missing.push_back(o);
    }
    if (!missing.empty()) {
        for (const auto& o : missing) {
            ctx.err << "error: missing tile at (" << o.x << "," << o.y << "): " << (args.tiles / tile_name(o)).string()
                    << '\n';
        }
        return kExitUsage;
    }
    std::vector<PlacedTile> tiles;
    tiles.reserve(grid.origins.size());
    for (const auto& o : grid.origins) tiles.push_back({o, read_image(args.tiles / tile_name(o))});

    const ImageTile out = stitch(tiles, grid, args.blend);
    if (args.out.has_parent_path()) ensure_dir(args.out.parent_path());
    write_image(args.out, out);

    const SeamReport seams = seam_report(out, grid);
    json list = json::array();
    for (const auto& s : seams.seams) {
        list.push_back({{"axis", s.axis == SeamAxis::vertical ? "vertical" : "horizontal"},
                        {"position", s.position},
                        {"value", s.value}});
    }
    fs::path seam_path = args.out;
    seam_path.replace_extension(".seams.json");
    write_json(seam_path, {{"blend", args.blend == Blend::average ? "average" : "feather"},
                           {"config_digest", ctx.digest},
                           {"grid", grid_to_json(grid)},
                           {"seams", list},
                           {"max", seams.max},
                           {"mean", seams.mean},
                           {"baseline_x", seams.baseline_x},
                           {"baseline_y", seams.baseline_y}});
    ctx.log("stitched " + std::to_string(tiles.size()) + " tiles, max seam " + format_number(seams.max));
    return kExitOk;
}

int cmd_features(const Context& ctx, const FeaturesArgs& args) {
    CsvTable t;
    try {
        t = read_csv(args.manifest);
        if (!t.column(args.column)) {
            throw Error(ErrorCode::InvalidArgument, "manifest lacks column '" + args.column + "'");
        }
    } catch (const Error& e) {
        ctx.err << "error: " << args.manifest.string() << ": " << e.what() << '\n';
        return kExitUsage;
    }
    const std::size_t col = *t.column(args.column);
    const auto id_col = t.column("tile_id");
    const fs::path base = args.manifest.parent_path();

    std::vector<std::vector<float>> rows(t.rows.size());
    std::vector<std::string> errors(t.rows.size());
    parallel_for(t.rows.size(), [&](std::size_t i) {
        try {
            rows[i] = toy_encoder(read_image(resolve(base, t.rows[i][col])));
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    std::vector<float> data;
    std::vector<std::string> ids;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (!errors[i].empty()) {
            ++skipped;
            ctx.warn("row " + std::to_string(i + 1) + " skipped: " + errors[i]);
            continue;
        }
        data.insert(data.end(), rows[i].begin(), rows[i].end());
        ids.push_back(id_col ? t.rows[i][*id_col] : t.rows[i][col]);
    }
    if (ids.empty()) {
        ctx.err << "error: no readable tiles in " << args.manifest.string() << '\n';
        return kExitUsage;
    }
    if (args.out.has_parent_path()) ensure_dir(args.out.parent_path());
    const std::size_t n = ids.size();
    write_features(args.out, FeatureSet(n, kToyEncoderDim, std::move(data), kToyEncoderTag, std::move(ids)));
    ctx.log("encoded " + std::to_string(t.rows.size() - skipped) + " tiles, skipped " + std::to_string(skipped));
    return skipped == 0 ? kExitOk : kExitPartial;
}

}  // namespace vstain::cli
