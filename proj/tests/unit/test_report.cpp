#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "doctest.h"
#include "fixtures.hpp"
#include "vstain/errors.hpp"
#include "vstain/report.hpp"
#include "vstain/stats.hpp"

using namespace vstain;

namespace {

MetricRecord rec(std::string model, std::string tile, double mse_v, double dice_v, std::string group = "g") {
    MetricRecord r;
    r.model_id = std::move(model);
    r.tile_id = std::move(tile);
    r.group = std::move(group);
    r.texture = TextureScore{mse_v, psnr_from_mse(mse_v), 0.5};
    SegScore s;
    s.dice = dice_v;
    s.iou = dice_v / (2 - dice_v);
    s.hausdorff = 3;
    s.tpr = 0.5;
    r.seg = s;
    return r;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
    return n;
}

const CorrelationEntry& entry(const std::vector<CorrelationEntry>& es, const std::string& scope) {
    const auto it = std::find_if(es.begin(), es.end(), [&](const auto& e) { return e.scope == scope; });
    REQUIRE(it != es.end());
    return *it;
}

}  // namespace

TEST_CASE("summaries and aggregates") {
    const auto single = aggregate(std::vector<MetricRecord>{rec("m", "t", 4, 0.7)});
    CHECK(single.at("m").at("dice").mean == 0.7);
    CHECK(single.at("m").at("mse").mean == 4.0);
    CHECK(std::isnan(single.at("m").at("dice").std));
    CHECK(single.at("m").at("tnr").n == 0);
    CHECK(single.at("m").at("tnr").excluded == 1);

    const auto two = aggregate(std::vector<MetricRecord>{rec("m", "a", 1, 0.4), rec("m", "b", 1, 0.6)});
    CHECK(two.at("m").at("dice").mean == doctest::Approx(0.5).epsilon(1e-15));

    const auto s = summarize({20, 30}, 1);
    CHECK(s.mean == 25.0);
    CHECK(s.excluded == 1);
    std::vector<MetricRecord> inf{rec("m", "a", 0, 1), rec("m", "b", 0, 1), rec("m", "c", 0, 1)};
    inf[0].texture->psnr = 20;
    inf[1].texture->psnr = 30;
    const auto p = aggregate(inf).at("m").at("psnr");
    CHECK(p.mean == 25.0);
    CHECK(p.n == 2);
    CHECK(p.excluded == 1);
    CHECK(aggregate(inf).at("m").at("tnr").excluded == 3);

    CHECK(summarize({5, 1, 3}).median == 3.0);
    CHECK(summarize({4, 1, 3, 2}).median == 2.5);
    CHECK(std::isnan(summarize({}).mean));
    CHECK_THROWS_AS(aggregate(std::vector<MetricRecord>{}), Error);
}

TEST_CASE("aggregation is order independent and composes") {
    fixture::Rng rng(100);
    std::vector<MetricRecord> a, b;
    for (int i = 0; i < 17; ++i) a.push_back(rec("m", "a" + std::to_string(i), 1 + 50 * fixture::uniform01(rng),
                                                 fixture::uniform01(rng)));
    for (int i = 0; i < 9; ++i) b.push_back(rec("m", "b" + std::to_string(i), 1 + 50 * fixture::uniform01(rng),
                                                fixture::uniform01(rng)));
    auto all = a;
    all.insert(all.end(), b.begin(), b.end());
    const auto sa = aggregate(a).at("m").at("dice"), sb = aggregate(b).at("m").at("dice");
    const auto sall = aggregate(all).at("m").at("dice");
    CHECK(sall.n == sa.n + sb.n);
    CHECK(sall.mean == doctest::Approx((sa.mean * 17 + sb.mean * 9) / 26).epsilon(1e-14));
    std::reverse(all.begin(), all.end());
    CHECK(aggregate(all).at("m").at("dice").mean == sall.mean);

    const auto groups = aggregate(std::vector<MetricRecord>{rec("m", "1", 1, 0.2, "x"), rec("n", "1", 1, 0.4, "x"),
                                                            rec("m", "2", 1, 0.9, "y")},
                                  GroupBy::group);
    CHECK(groups.at("x").at("dice").mean == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(groups.at("y").at("dice").n == 1);
}

TEST_CASE("record validation and lookup") {
    CHECK_THROWS_AS(validate_records(std::vector<MetricRecord>{rec("m", "a", 1, 1), rec("m", "a", 2, 1)}), Error);
    validate_records(std::vector<MetricRecord>{rec("m", "a", 1, 1), rec("n", "a", 2, 1)});
    MetricRecord bare;
    bare.model_id = "m";
    bare.tile_id = "t";
    CHECK_THROWS_AS(validate_records(std::vector<MetricRecord>{bare}), Error);

    auto r = rec("m", "a", 0, 1);
    CHECK(lookup_metric(r, "psnr").state == MetricState::sentinel);
    CHECK(lookup_metric(r, "tnr").state == MetricState::sentinel);
    CHECK(lookup_metric(r, "tpr").value == 0.5);
    r.seg.reset();
    CHECK(lookup_metric(r, "dice").state == MetricState::absent);
    CHECK_THROWS_AS(lookup_metric(r, "fid"), Error);
}

TEST_CASE("correlations") {
    fixture::Rng rng(101);
    std::vector<MetricRecord> recs;
    for (int i = 0; i < 12; ++i) recs.push_back(rec("m", std::to_string(i), 5 + 100 * fixture::uniform01(rng), 0.5));
    const std::vector<std::string> self{"dice", "dice"}, tex{"mse", "psnr"};
    for (int i = 0; i < 12; ++i) recs[std::size_t(i)].seg->dice = fixture::uniform01(rng);
    for (const auto& e : correlation_matrix(recs, self, CorrelationLevel::tile)) {
        REQUIRE(e.r);
        CHECK(*e.r == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(*entry(correlation_matrix(recs, tex, CorrelationLevel::tile), "pooled").r < 0);

    // anticorrelated within each model, means aligned across the two models
    std::vector<MetricRecord> toy;
    const double dice_a[3] = {0.2, 0.5, 0.8}, mse_a[3] = {10, 40, 90};
    for (int i = 0; i < 3; ++i) {
        toy.push_back(rec("A", std::to_string(i), mse_a[i], dice_a[i]));
        toy.push_back(rec("B", std::to_string(i), mse_a[i] + 5, dice_a[i] + 0.1));
    }
    const std::vector<std::string> pair{"psnr", "dice"};
    const auto tiles = correlation_matrix(toy, pair, CorrelationLevel::tile);
    CHECK(*entry(tiles, "A").r < 0);
    CHECK(*entry(tiles, "pooled").r < 0);
    CHECK(*entry(tiles, "per_model_mean").r < 0);
    const auto models = correlation_matrix(toy, pair, CorrelationLevel::model);
    REQUIRE(models.size() == 1);
    CHECK(!models[0].r);
    CHECK(models[0].n == 2);
    CHECK(models[0].error.find("TooFewSamples") != std::string::npos);

    // one tile per model: model level equals pooled tile level
    std::vector<MetricRecord> singles;
    for (int i = 0; i < 7; ++i)
        singles.push_back(rec("m" + std::to_string(i), "t", 1 + 30 * fixture::uniform01(rng), fixture::uniform01(rng)));
    const auto ml = correlation_matrix(singles, pair, CorrelationLevel::model);
    const auto tl = correlation_matrix(singles, pair, CorrelationLevel::tile);
    CHECK(*ml[0].r == doctest::Approx(*entry(tl, "pooled").r).epsilon(1e-12));
}

TEST_CASE("model tests") {
    std::vector<MetricRecord> recs;
    for (int i = 0; i < 6; ++i) {
        recs.push_back(rec("A", std::to_string(i), 10 + i, 0.5 + 0.01 * i));
        recs.push_back(rec("B", std::to_string(i), 40 + 2 * i, 0.52 + 0.01 * i));
    }
    const std::vector<std::string> metrics{"mse", "dice", "tnr"};
    const auto tests = model_tests(recs, "A", metrics);
    REQUIRE(tests.size() == 3);
    CHECK(tests[0].other_model == "B");
    REQUIRE(tests[0].result);
    CHECK(tests[0].result->p < 1e-6);
    CHECK(!tests[2].result);
    CHECK(!tests[2].error.empty());
}

TEST_CASE("number formatting, CSV and JSON") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1e300) == "1e+300");
    CHECK(format_number(INFINITY) == "inf");
    CHECK(format_number(-INFINITY) == "-inf");
    CHECK(format_number(NAN).empty());
    CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);

    auto r = rec("m,1", "t\"x", 0, 0.5);
    r.manual_flags["blur"] = true;
    const auto csv = records_csv(std::vector<MetricRecord>{r});
    CHECK(csv.find("\"m,1\"") != std::string::npos);
    CHECK(csv.find("\"t\"\"x\"") != std::string::npos);
    CHECK(csv.find("inf") != std::string::npos);

    const auto j = to_json(summarize({}));
    CHECK(j["mean"].is_null());
    CHECK(j["n"] == 0);
}

TEST_CASE("scatter plots") {
    const std::vector<ScatterPoint> one{{1.0, 2.0, "a"}};
    const ScatterSpec spec{"t", "x", "y"};
    const auto svg = scatter_svg(one, spec);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(count_of(svg, "class=\"marker") == 1);
    CHECK(scatter_svg(one, spec) == svg);

    std::vector<ScatterPoint> many;
    for (int i = 0; i < 16; ++i) many.push_back({double(i), double(i * i % 7), i % 2 ? "blur" : "stain"});
    many.push_back({INFINITY, 1, "blur"});
    const auto m = scatter_svg(many, spec);
    CHECK(count_of(m, "class=\"marker") == 16);
    CHECK(count_of(m, "class=\"marker s0\"") == 8);
    CHECK(count_of(m, "class=\"marker s1\"") == 8);

    const std::vector<ScatterPoint> bad{{NAN, 1, "a"}};
    CHECK_THROWS_AS(scatter_svg(bad, spec), Error);

    const auto dir = std::filesystem::temp_directory_path() / ("vstain_svg_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    render_scatter(many, spec, dir / "a.svg");
    render_scatter(many, spec, dir / "b.svg");
    std::ifstream fa(dir / "a.svg"), fb(dir / "b.svg");
    std::stringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() == m);
    CHECK_THROWS_AS(render_scatter(many, spec, dir / "no" / "such" / "dir.svg"), Error);
    std::filesystem::remove_all(dir);
}
