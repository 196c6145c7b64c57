#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "json.hpp"
#include "vstain/cli.hpp"
#include "vstain/csv.hpp"
#include "vstain/distribution.hpp"
#include "vstain/errors.hpp"
#include "vstain/feature_io.hpp"
#include "vstain/image_io.hpp"
#include "vstain/stain.hpp"

using namespace vstain;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "vstain");
    std::ostringstream out, err;
    Run r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("vstain_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

Rgb brown(double dab) {
    const auto b = StainBasis::hed_default();
    return {intensity_from_od(dab * b.rows()[2][0]), intensity_from_od(dab * b.rows()[2][1]),
            intensity_from_od(dab * b.rows()[2][2])};
}

ImageTile stained_tile(fixture::Rng& rng, std::size_t size) {
    auto img = fixture::textured_image(rng, size, size);
    for (auto& v : img.pixels()) v = std::uint8_t(200 + v / 5);  // pale background
    const auto x0 = std::size_t(fixture::uniform_int(rng, 0, int(size / 2)));
    const auto y0 = std::size_t(fixture::uniform_int(rng, 0, int(size / 2)));
    for (std::size_t y = y0; y < y0 + size / 3; ++y)
        for (std::size_t x = x0; x < x0 + size / 3; ++x) img.set(x, y, brown(0.8));
    return img;
}

}  // namespace

TEST_CASE("csv reader") {
    const auto t = parse_csv("a,b,c\r\n1,\"x,y\",\"say \"\"hi\"\"\"\n\n2,,\"multi\nline\"\n");
    CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "x,y");
    CHECK(t.rows[0][2] == "say \"hi\"");
    CHECK(t.rows[1][1].empty());
    CHECK(t.rows[1][2] == "multi\nline");
    CHECK(*t.column("c") == 2);
    CHECK(!t.column("d"));
    CHECK_THROWS_AS(parse_csv("a,b\n1,2,3\n"), Error);
    CHECK_THROWS_AS(parse_csv("a\n\"open\n"), Error);
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("q\"") == "\"q\"\"\"");
}

TEST_CASE("usage errors exit 1") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"eval", "--manifest", "x.csv"}).code == cli::kExitUsage);
    CHECK(run({"--help"}).code == cli::kExitOk);
    TempDir d;
    CHECK(run({"--config", d / "missing.json", "tile", "--image", d / "i.png", "--out", d / "t"}).code ==
          cli::kExitUsage);
    spit(d.path / "bad.json", R"({"grid": {"tile": 8, "overlap": 8}})");
    const auto r = run({"--config", d / "bad.json", "tile", "--image", d / "i.png", "--out", d / "t"});
    CHECK(r.code == cli::kExitUsage);
    CHECK(r.err.find("ConfigError") != std::string::npos);
}

TEST_CASE("eval on identical pairs") {
    TempDir d;
    fixture::Rng rng(200);
    std::string manifest = "tile_id,group,real_path,virtual_path\n";
    for (int i = 0; i < 10; ++i) {
        const std::string name = "t" + std::to_string(i) + ".png";
        write_image(d.path / name, stained_tile(rng, 48));
        manifest += "t" + std::to_string(i) + ",g" + std::to_string(i % 2) + "," + name + "," + name + "\n";
    }
    spit(d.path / "m.csv", manifest);
    const auto r = run({"--quiet", "eval", "--manifest", d / "m.csv", "--out", d / "out"});
    REQUIRE(r.code == cli::kExitOk);
    const auto report = json::parse(slurp(d.path / "out" / "report.json"));
    REQUIRE(report["models"].size() == 1);
    const auto& agg = report["models"][0]["aggregates"];
    CHECK(agg["dice"]["mean"] == 1.0);
    CHECK(agg["dice"]["n"] == 10);
    CHECK(agg["mse"]["mean"] == 0.0);
    CHECK(agg["psnr"]["excluded"] == 10);
    CHECK(agg["psnr"]["n"] == 0);
    CHECK(report["config_digest"].get<std::string>().size() == 64);
    CHECK(fs::exists(d.path / "out" / "records.csv"));
    CHECK(fs::exists(d.path / "out" / "metadata.json"));
    CHECK(fs::exists(d.path / "out" / "ssim_vs_dice.svg"));

    // byte-identical outputs across reruns and worker counts
    const auto r2 = run({"--quiet", "--workers", "3", "eval", "--manifest", d / "m.csv", "--out", d / "out2"});
    REQUIRE(r2.code == cli::kExitOk);
    for (const char* f : {"report.json", "records.csv", "ssim_vs_dice.svg"})
        CHECK(slurp(d.path / "out" / f) == slurp(d.path / "out2" / f));
}

TEST_CASE("eval failures and bad manifests") {
    TempDir d;
    fixture::Rng rng(201);
    std::string manifest = "tile_id,real_path,virtual_path\n";
    for (int i = 0; i < 10; ++i) {
        const std::string name = "t" + std::to_string(i) + ".png";
        if (i != 4) write_image(d.path / name, stained_tile(rng, 40));
        manifest += "t" + std::to_string(i) + "," + name + "," + name + "\n";
    }
    spit(d.path / "m.csv", manifest);
    const auto r = run({"--quiet", "eval", "--manifest", d / "m.csv", "--out", d / "out"});
    CHECK(r.code == cli::kExitPartial);
    CHECK(r.err.find("t4") != std::string::npos);
    const auto report = json::parse(slurp(d.path / "out" / "report.json"));
    REQUIRE(report["failures"].size() == 1);
    CHECK(report["failures"][0]["tile_id"] == "t4");
    CHECK(report["models"][0]["n_tiles"] == 9);

    spit(d.path / "empty.csv", "tile_id,real_path,virtual_path\n");
    const auto e = run({"eval", "--manifest", d / "empty.csv", "--out", d / "o2"});
    CHECK(e.code == cli::kExitUsage);
    CHECK(!e.err.empty());
    spit(d.path / "nocol.csv", "tile_id,real_path\nx,y\n");
    CHECK(run({"eval", "--manifest", d / "nocol.csv", "--out", d / "o3"}).code == cli::kExitUsage);
    spit(d.path / "dup.csv", "tile_id,real_path,virtual_path\na,t0.png,t0.png\na,t1.png,t1.png\n");
    CHECK(run({"eval", "--manifest", d / "dup.csv", "--out", d / "o4"}).code == cli::kExitUsage);
}

TEST_CASE("eval with external masks and report rebuild") {
    TempDir d;
    fixture::Rng rng(202);
    std::string manifest = "model_id,tile_id,real_path,virtual_path,real_mask_path,virtual_mask_path,manual_flags\n";
    for (int i = 0; i < 4; ++i) {
        const std::string s = std::to_string(i);
        write_image(d.path / ("r" + s + ".png"), fixture::textured_image(rng, 32, 32));
        write_image(d.path / ("v" + s + ".png"), fixture::textured_image(rng, 32, 32));
        BinaryMask gt(32, 32), pred(32, 32);
        for (std::size_t y = 0; y < 16; ++y)
            for (std::size_t x = 0; x < 32; ++x) {
                gt.set(x, y, true);
                pred.set(x, y + std::size_t(i) * 4, true);
            }
        write_mask(d.path / ("gt" + s + ".png"), gt);
        write_mask(d.path / ("p" + s + ".png"), pred);
        manifest += "m,t" + s + ",r" + s + ".png,v" + s + ".png,gt" + s + ".png,p" + s + ".png,blur=" +
                    std::to_string(i % 2) + "\n";
    }
    spit(d.path / "m.csv", manifest);
    REQUIRE(run({"--quiet", "eval", "--manifest", d / "m.csv", "--out", d / "out"}).code == cli::kExitOk);
    const auto report = json::parse(slurp(d.path / "out" / "report.json"));
    // overlaps 16, 12, 8, 4 rows of 16 → dice 1, .75, .5, .25
    CHECK(report["models"][0]["aggregates"]["dice"]["mean"].get<double>() == doctest::Approx(0.625));
    const auto csv = parse_csv(slurp(d.path / "out" / "records.csv"));
    CHECK(csv.rows[1][*csv.column("manual_flags")] == "blur=1");

    REQUIRE(run({"--quiet", "report", "--records", d / "out/records.csv", "--out", d / "rebuilt"}).code ==
            cli::kExitOk);
    const auto rebuilt = json::parse(slurp(d.path / "rebuilt" / "report.json"));
    CHECK(rebuilt["models"] == report["models"]);
    CHECK(rebuilt["correlations"] == report["correlations"]);
}

TEST_CASE("features and dist") {
    TempDir d;
    fixture::Rng rng(203);
    std::string manifest = "tile_id,path\n";
    for (int i = 0; i < 6; ++i) {
        const std::string name = "f" + std::to_string(i) + ".png";
        write_image(d.path / name, fixture::textured_image(rng, 24, 24));
        manifest += "id" + std::to_string(i) + "," + name + "\n";
    }
    spit(d.path / "m.csv", manifest);
    REQUIRE(run({"--quiet", "features", "--manifest", d / "m.csv", "--out", d / "a.feat"}).code == cli::kExitOk);
    REQUIRE(run({"--quiet", "features", "--manifest", d / "m.csv", "--out", d / "b.feat"}).code == cli::kExitOk);
    CHECK(slurp(d.path / "a.feat") == slurp(d.path / "b.feat"));
    const auto fs6 = read_features(d.path / "a.feat");
    CHECK(fs6.n() == 6);
    CHECK(fs6.d() == 64);
    CHECK(fs6.encoder_tag() == "toy-v1");
    CHECK(fs6.ids()[5] == "id5");

    spit(d.path / "gap.csv", manifest + "id6,nothere.png\n");
    const auto g = run({"--quiet", "features", "--manifest", d / "gap.csv", "--out", d / "c.feat"});
    CHECK(g.code == cli::kExitPartial);
    CHECK(g.err.find("row 7") != std::string::npos);
    CHECK(read_features(d.path / "c.feat").n() == 6);
    spit(d.path / "none.csv", "path\nnothere.png\n");
    CHECK(run({"--quiet", "features", "--manifest", d / "none.csv", "--out", d / "e.feat"}).code == cli::kExitUsage);

    const auto same = run({"dist", "--real", d / "a.feat", "--virtual", d / "b.feat", "--k", "2"});
    REQUIRE(same.code == cli::kExitOk);
    const auto j = json::parse(same.out);
    CHECK(std::abs(j["frechet"].get<double>()) < 1e-8);
    CHECK(j["precision"] == 1.0);
    CHECK(j["recall"] == 1.0);
    CHECK(j["k"] == 2);

    write_features(d.path / "other.feat", FeatureSet(6, 64, std::vector<float>(6 * 64, 0.5f), "uni"));
    CHECK(run({"dist", "--real", d / "a.feat", "--virtual", d / "other.feat"}).code == cli::kExitUsage);
    CHECK(run({"dist", "--real", d / "a.feat", "--virtual", d / "other.feat", "--allow-tag-mismatch", "--k", "2"})
              .code == cli::kExitOk);
}

TEST_CASE("dist passes library values through") {
    TempDir d;
    fixture::Rng rng(204);
    const auto x = fixture::gaussian_set(rng, 9, 3, {0, 0, 0});
    const auto y = fixture::gaussian_set(rng, 7, 3, {0.5, 0, 0});
    write_features(d.path / "x.feat", x);
    write_features(d.path / "y.feat", y);
    spit(d.path / "c.json", R"({"kid": {"estimator": "biased", "subsets": 0}, "manifold_k": 2})");
    const auto r = run({"--config", d / "c.json", "dist", "--real", d / "x.feat", "--virtual", d / "y.feat",
                        "--out", d / "r.json"});
    REQUIRE(r.code == cli::kExitOk);
    const auto j = json::parse(slurp(d.path / "r.json"));
    CHECK(j["frechet"].get<double>() == frechet_distance(moments(x), moments(y)));
    CHECK(j["kid"].get<double>() == kernel_distance(x, y, MmdEstimator::biased));
    CHECK(j["kid_x1000"].get<double>() == kernel_distance(x, y, MmdEstimator::biased) * 1000.0);
    const auto pr = precision_recall(x, y, 2);
    CHECK(j["precision"].get<double>() == pr.precision);
    CHECK(j["recall"].get<double>() == pr.recall);

    // k too large for the smaller set: metrics that can be computed still are
    const auto big_k = run({"dist", "--real", d / "x.feat", "--virtual", d / "y.feat", "--k", "7"});
    CHECK(big_k.code == cli::kExitPartial);
    const auto bj = json::parse(big_k.out);
    CHECK(bj["precision"].is_null());
    CHECK(bj["frechet"].is_number());
    CHECK(bj["errors"].contains("precision_recall"));

    spit(d.path / "junk.feat", "nope");
    CHECK(run({"dist", "--real", d / "junk.feat", "--virtual", d / "y.feat"}).code == cli::kExitUsage);
}

TEST_CASE("tile and stitch") {
    TempDir d;
    fixture::Rng rng(205);
    const auto img = fixture::random_image(rng, 70, 50);
    write_image(d.path / "src.png", img);
    REQUIRE(run({"--quiet", "tile", "--image", d / "src.png", "--out", d / "tiles", "--tile", "32", "--overlap", "20"})
                .code == cli::kExitOk);
    REQUIRE(run({"--quiet", "stitch", "--tiles", d / "tiles", "--grid", d / "tiles/grid.json", "--out",
                 d / "back.png"})
                .code == cli::kExitOk);
    CHECK(slurp(d.path / "src.png") == slurp(d.path / "back.png"));
    CHECK(read_image(d.path / "back.png") == img);
    const auto seams = json::parse(slurp(d.path / "back.seams.json"));
    CHECK(!seams["seams"].empty());
    CHECK(seams["blend"] == "average");

    REQUIRE(run({"--quiet", "stitch", "--tiles", d / "tiles", "--grid", d / "tiles/grid.json", "--blend", "feather",
                 "--out", d / "feather.png"})
                .code == cli::kExitOk);
    CHECK(read_image(d.path / "feather.png") == img);

    fs::remove(d.path / "tiles" / "tile_x12_y0.png");
    const auto miss = run({"stitch", "--tiles", d / "tiles", "--grid", d / "tiles/grid.json", "--out", d / "x.png"});
    CHECK(miss.code == cli::kExitUsage);
    CHECK(miss.err.find("(12,0)") != std::string::npos);

    write_image(d.path / "flat.png", ImageTile(64, 40, Rgb{10, 20, 30}));
    REQUIRE(run({"--quiet", "tile", "--image", d / "flat.png", "--out", d / "ft", "--tile", "16", "--overlap", "4"})
                .code == cli::kExitOk);
    REQUIRE(run({"--quiet", "stitch", "--tiles", d / "ft", "--grid", d / "ft/grid.json", "--out", d / "flat2.png"})
                .code == cli::kExitOk);
    const auto fj = json::parse(slurp(d.path / "flat2.seams.json"));
    for (const auto& s : fj["seams"]) CHECK(s["value"] == 0.0);
    CHECK(fj["max"] == 0.0);
}

TEST_CASE("prep") {
    TempDir d;
    fixture::Rng rng(206);
    // pale tissue with one brown block; H&E stand-in is the same geometry in purple
    ImageTile ihc(160, 160, Rgb{235, 230, 225}), he(160, 160, Rgb{240, 240, 240});
    for (std::size_t y = 20; y < 140; ++y)
        for (std::size_t x = 20; x < 140; ++x) he.set(x, y, {150, 90, 170});
    for (std::size_t y = 30; y < 60; ++y)
        for (std::size_t x = 30; x < 60; ++x) ihc.set(x, y, brown(0.3));
    write_image(d.path / "he.png", he);
    write_image(d.path / "ihc.png", ihc);
    write_image(d.path / "white.png", ImageTile(160, 160, Rgb{255, 255, 255}));
    spit(d.path / "slides.csv", "group,he_path,ihc_path\np1,he.png,ihc.png\np2,white.png,white.png\n");
    spit(d.path / "c.json", R"({"tissue": {"min_area": 100}, "patches": {"size": 32, "per_class": 4}})");

    const std::vector<std::string> args{"--quiet", "--config", d / "c.json", "--seed", "5", "prep",
                                        "--slides", d / "slides.csv"};
    auto a1 = args, a2 = args;
    a1.insert(a1.end(), {"--out", d / "p1"});
    a2.insert(a2.end(), {"--out", d / "p2"});
    const auto r = run(a1);
    REQUIRE(r.code == cli::kExitOk);
    CHECK(r.err.find("p2") != std::string::npos);  // white slide warns
    REQUIRE(run(a2).code == cli::kExitOk);
    CHECK(slurp(d.path / "p1" / "manifest.csv") == slurp(d.path / "p2" / "manifest.csv"));

    const auto m = parse_csv(slurp(d.path / "p1" / "manifest.csv"));
    std::size_t pos = 0, neg = 0;
    for (const auto& row : m.rows) {
        CHECK(row[0] == "p1");
        (row[1] == "positive" ? pos : neg) += 1;
        CHECK(fs::exists(d.path / "p1" / row[5]));
        CHECK(fs::exists(d.path / "p1" / row[6]));
    }
    CHECK(pos == 4);
    CHECK(neg == 4);
    const auto rep = json::parse(slurp(d.path / "p1" / "prep_report.json"));
    CHECK(rep["groups"]["p2"]["positive"] == 0);
    CHECK(rep["groups"]["p1"]["negative"] == 4);
    CHECK(rep["slides"][0]["tissue_boxes"].size() == 1);

    CHECK(run({"prep", "--out", d / "p3"}).code == cli::kExitUsage);
    const auto bad = run({"--quiet", "prep", "--he", d / "none.png", "--ihc", d / "none.png", "--out", d / "p4"});
    CHECK(bad.code == cli::kExitPartial);
}
