#include <cstdlib>
#include <optional>

#include "CLI11.hpp"
#include "commands.hpp"
#include "vstain/cli.hpp"
#include "vstain/errors.hpp"
#include "vstain/parallel.hpp"

namespace vstain::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Evaluation toolkit for virtually stained IHC tiles", "vstain"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned workers = 0;
    bool quiet = false;
    app.add_option("--config", config_path, "JSON run configuration (default: $VSTAIN_CONFIG)");
    app.add_option("--seed", seed, "Random seed, overrides the config");
    app.add_option("--workers", workers, "Worker threads (0 = all cores)");
    app.add_flag("--quiet", quiet, "Only print warnings and errors");

    std::optional<double> dab_threshold;
    std::optional<std::size_t> k;
    std::optional<std::size_t> tile;
    std::optional<std::size_t> overlap;
    std::optional<std::size_t> per_class;
    std::optional<std::size_t> patch_size;
    bool allow_mismatch = false;
    bool all_tiles = false;

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score real/virtual tile pairs listed in a manifest");
    eval_cmd->add_option("--manifest", eval.manifest, "CSV: tile_id,group,real_path,virtual_path[,...]")->required();
    eval_cmd->add_option("--out", eval.out, "Output directory")->required();
    eval_cmd->add_option("--model", eval.model, "Model id when the manifest has no model_id column");
    eval_cmd->add_option("--dab-threshold", dab_threshold, "DAB concentration threshold");
    eval_cmd->add_flag("--all-tiles", all_tiles, "Include tiles without ground-truth positives in segmentation summaries");

    DistArgs dist;
    auto* dist_cmd = app.add_subcommand("dist", "Distribution metrics between two FEAT1 feature files");
    dist_cmd->add_option("--real", dist.real, "Real features (FEAT1)")->required();
    dist_cmd->add_option("--virtual", dist.virt, "Virtual features (FEAT1)")->required();
    dist_cmd->add_option("--out", dist.out, "Write JSON here instead of stdout");
    dist_cmd->add_option("--k", k, "Neighbour count for precision/recall");
    dist_cmd->add_flag("--allow-tag-mismatch", allow_mismatch, "Compare features from different encoders");

    PrepArgs prep;
    auto* prep_cmd = app.add_subcommand("prep", "Tissue boxes, areas of interest and balanced patch sampling");
    prep_cmd->add_option("--slides", prep.slides, "CSV: group,he_path,ihc_path");
    prep_cmd->add_option("--he", prep.he, "Single H&E image");
    prep_cmd->add_option("--ihc", prep.ihc, "Single IHC image, registered to --he");
    prep_cmd->add_option("--group", prep.group, "Group key for --he/--ihc");
    prep_cmd->add_option("--out", prep.out, "Output directory")->required();
    prep_cmd->add_option("--per-class", per_class, "Patches per polarity per slide");
    prep_cmd->add_option("--patch-size", patch_size, "Patch edge in pixels");

    TileArgs tile_args;
    auto* tile_cmd = app.add_subcommand("tile", "Cut an image into an overlapping tile grid");
    tile_cmd->add_option("--image", tile_args.image, "Source image")->required();
    tile_cmd->add_option("--out", tile_args.out, "Output directory for tiles and grid.json")->required();
    tile_cmd->add_option("--tile", tile, "Tile edge in pixels");
    tile_cmd->add_option("--overlap", overlap, "Overlap in pixels");

    StitchArgs stitch_args;
    std::string blend = "average";
    auto* stitch_cmd = app.add_subcommand("stitch", "Blend a tile grid back into one image");
    stitch_cmd->add_option("--tiles", stitch_args.tiles, "Directory of tile_x{X}_y{Y}.png files")->required();
    stitch_cmd->add_option("--grid", stitch_args.grid, "grid.json")->required();
    stitch_cmd->add_option("--blend", blend, "average or feather")->check(CLI::IsMember({"average", "feather"}));
    stitch_cmd->add_option("--out", stitch_args.out, "Output image (.png or .tif)")->required();

    FeaturesArgs feat;
    auto* feat_cmd = app.add_subcommand("features", "Embed tiles with the built-in toy encoder");
    feat_cmd->add_option("--manifest", feat.manifest, "CSV with an image path column")->required();
    feat_cmd->add_option("--column", feat.column, "Image path column");
    feat_cmd->add_option("--out", feat.out, "Output FEAT1 file")->required();

    ReportArgs rep;
    auto* report_cmd = app.add_subcommand("report", "Rebuild report.json and plots from records.csv");
    report_cmd->add_option("--records", rep.records, "records.csv from eval")->required();
    report_cmd->add_option("--out", rep.out, "Output directory")->required();

    for (auto* sub : {eval_cmd, dist_cmd, prep_cmd, tile_cmd, stitch_cmd, feat_cmd, report_cmd}) sub->fallthrough();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    RunConfig cfg;
    try {
        if (config_path.empty()) {
            if (const char* env = std::getenv("VSTAIN_CONFIG"); env && *env) config_path = env;
        }
        if (!config_path.empty()) cfg = load_config(config_path);
        if (seed) cfg.seed = *seed;
        if (dab_threshold) cfg.dab_threshold = *dab_threshold;
        cfg.aoi.dab_threshold = cfg.dab_threshold;
        if (k) cfg.manifold_k = *k;
        if (tile) cfg.tile = *tile;
        if (overlap) cfg.overlap = *overlap;
        if (per_class) cfg.patches.per_class = *per_class;
        if (patch_size) cfg.patches.size = *patch_size;
        if (allow_mismatch) cfg.allow_tag_mismatch = true;
        if (all_tiles) cfg.positives_only = false;
        cfg.validate();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    set_worker_count(workers);

    const Context ctx{cfg, config_digest(cfg), quiet, out, err};
    stitch_args.blend = blend == "feather" ? Blend::feather : Blend::average;
    try {
        if (*eval_cmd) return cmd_eval(ctx, eval);
        if (*dist_cmd) return cmd_dist(ctx, dist);
        if (*prep_cmd) return cmd_prep(ctx, prep);
        if (*tile_cmd) return cmd_tile(ctx, tile_args);
        if (*stitch_cmd) return cmd_stitch(ctx, stitch_args);
        if (*feat_cmd) return cmd_features(ctx, feat);
        if (*report_cmd) return cmd_report(ctx, rep);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace vstain::cli
