#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "orprobe/circstats.hpp"
#include "orprobe/imagegen.hpp"
#include "orprobe/probe.hpp"
#include "orprobe/substitution.hpp"
#include "orprobe/synthoracle.hpp"

namespace orprobe {

// Each command writes its artifacts plus a run.json into `out_dir` and
// returns the run record. The record's "metrics" object is what a replay
// must reproduce exactly.

enum class GenMode { Whole, Blended, Planted, PlantedConditions };

struct GenOptions {
    GenMode mode = GenMode::Whole;
    std::filesystem::path source;  // whole-image source
    std::filesystem::path fg;      // blended foreground
    std::filesystem::path bg;      // blended background (natural)
    BgKind bg_kind = BgKind::Natural;
    int bg_width = 500;
    int bg_height = 375;
    int period = 16;
    Condition condition = Condition::FgOnly;
    GenSpec spec;
    PlantSpec plant;
    std::size_t bg_k_active = 1000;
    double bg_scale = 2.0;
    std::string set_id = "set";
    std::filesystem::path out_dir;
};

struct ProbeOptions {
    std::filesystem::path train_set;
    std::optional<std::filesystem::path> test_set;
    std::uint64_t split_seed = 0;
    CvConfig cv;
    std::filesystem::path out_dir;
};

struct StatsOptions {
    std::filesystem::path predictions_csv;
    int bins = 20;
    std::filesystem::path out_dir;
};

struct SubstOptions {
    std::filesystem::path probe;
    std::filesystem::path set;
    std::vector<SelectionMode> modes = {SelectionMode::ByWeight, SelectionMode::ByAbsDiff,
                                        SelectionMode::Random};
    double anchor_angle_deg = 9.0;
    std::vector<std::size_t> n_grid;  // empty: default grid
    bool all_targets = false;         // false: the test split only
    std::uint64_t split_seed = 0;
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;
};

struct MatrixOptions {
    std::map<Condition, std::filesystem::path> sets;
    std::vector<std::pair<Condition, Condition>> pairs;  // empty: every pair
    std::uint64_t split_seed = 0;
    CvConfig cv;
    std::filesystem::path out_dir;
};

struct MatrixCell {
    Condition train;
    Condition test;
    ProbeReport report;
};

nlohmann::json cmd_gen(const GenOptions& opt);
nlohmann::json cmd_probe(const ProbeOptions& opt);
nlohmann::json cmd_stats(const StatsOptions& opt);
nlohmann::json cmd_subst(const SubstOptions& opt);
nlohmann::json cmd_matrix(const MatrixOptions& opt);

/// Train on the split's train rows of one set, test on the split's test
/// rows of another (or the same) set.
ProbeReport train_and_test(const EmbeddingSet& train, const EmbeddingSet& test,
                           std::uint64_t split_seed, const CvConfig& cv,
                           CircularProbe* probe_out = nullptr);

/// Residual column of a predictions CSV written by the probe command.
std::vector<double> read_residuals_csv(const std::filesystem::path& path);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// Full command-line entry point; returns the process exit code.
/// Codes: 0 ok, 1 other error, 2 usage, 3 missing file, 4 format error,
/// 5 degenerate data.
int run_cli(const std::vector<std::string>& args);

/// Re-runs the command recorded in a run.json into `out_dir` and reports
/// whether every metric matches bit for bit.
bool replay_run(const std::filesystem::path& run_json, const std::filesystem::path& out_dir);

}  // namespace orprobe
