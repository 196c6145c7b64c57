#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "vstain/config.hpp"
#include "vstain/preprocess.hpp"

namespace vstain::cli {

namespace fs = std::filesystem;

struct Context {
    RunConfig config;
    std::string digest;
    bool quiet = false;
    std::ostream& out;
    std::ostream& err;

    void log(const std::string& line) const {
        if (!quiet) err << line << '\n';
    }
    void warn(const std::string& line) const { err << "warning: " << line << '\n'; }
};

struct EvalArgs {
    fs::path manifest;
    fs::path out;
    std::string model = "model";
};

struct DistArgs {
    fs::path real;
    fs::path virt;
    std::optional<fs::path> out;
};

struct PrepArgs {
    std::optional<fs::path> slides;
    std::optional<fs::path> he;
    std::optional<fs::path> ihc;
    std::string group = "default";
    fs::path out;
};

struct TileArgs {
    fs::path image;
    fs::path out;
};

struct StitchArgs {
    fs::path tiles;
    fs::path grid;
    Blend blend = Blend::average;
    fs::path out;
};

struct FeaturesArgs {
    fs::path manifest;
    std::string column = "path";
    fs::path out;
};

struct ReportArgs {
    fs::path records;
    fs::path out;
};

int cmd_eval(const Context& ctx, const EvalArgs& args);
int cmd_dist(const Context& ctx, const DistArgs& args);
int cmd_prep(const Context& ctx, const PrepArgs& args);
int cmd_tile(const Context& ctx, const TileArgs& args);
int cmd_stitch(const Context& ctx, const StitchArgs& args);
int cmd_features(const Context& ctx, const FeaturesArgs& args);
int cmd_report(const Context& ctx, const ReportArgs& args);

}  // namespace vstain::cli
