#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "orprobe/embedstore.hpp"
#include "orprobe/probe.hpp"

namespace orprobe {

enum class SelectionMode { ByWeight, ByAbsDiff, Random };

std::string_view to_string(SelectionMode m);
SelectionMode parse_selection_mode(std::string_view s);

struct FeatureRanking {
    SelectionMode mode = SelectionMode::ByWeight;
    std::vector<std::size_t> indices;  // permutation of 0..d-1, most relevant first
    std::uint64_t seed = 0;
};

/// ByWeight: |w_sin| + |w_cos| descending (needs probe).
/// ByAbsDiff: |anchor - target| descending (needs both vectors).
/// Random: seeded uniform permutation of `d` features.
/// Ties go to the lower index. Empty spans / null probe mean "not given".
FeatureRanking rank_features(const CircularProbe* probe, std::span<const float> anchor,
                             std::span<const float> target, SelectionMode mode,
                             std::uint64_t seed, std::size_t d = 0);

/// target with its first n ranked features overwritten by the anchor's.
std::vector<float> substitute(std::span<const float> target, std::span<const float> anchor,
                              const FeatureRanking& ranking, std::size_t n);

/// circ_diff(pred, anchor) / circ_diff(truth, anchor): 1 at the target's
/// own orientation, 0 at the anchor's.
double y_ratio(double pred_deg, double anchor_deg, double target_true_deg);

struct AnchorRecord {
    std::vector<float> features;  // normalised with the probe's stats
    double angle_deg = 0.0;
    std::optional<std::size_t> row;  // never used as a target when set
};

struct SubstitutionCurve {
    SelectionMode mode = SelectionMode::ByWeight;
    double anchor_angle_deg = 0.0;
    std::vector<std::size_t> n_grid;
    std::vector<double> y_mean;
    std::vector<double> y_std;
    std::vector<std::vector<double>> y_per_target;  // [target][grid point]
    std::vector<std::size_t> target_rows;
    std::optional<std::size_t> threshold_n;
};

/// 30 log-spaced counts in [1, d] plus the endpoints 0 and d, deduplicated.
std::vector<std::size_t> default_n_grid(std::size_t d, int points = 30);

/// Smallest grid n from which |y_mean| <= band holds at every later point.
std::optional<std::size_t> convergence_threshold(std::span<const std::size_t> n_grid,
                                                 std::span<const double> y_mean,
                                                 double band = 0.1);

/// For every target row and every n in the grid: substitute the top-n
/// anchor features, predict, and take the y-ratio. Targets sharing the
/// anchor's orientation are skipped. The Random mode draws one permutation
/// per curve from `seed`.
SubstitutionCurve convergence_curve(const CircularProbe& probe, const AnchorRecord& anchor,
                                    const EmbeddingSet& normalized,
                                    std::span<const std::size_t> target_rows, SelectionMode mode,
                                    std::span<const std::size_t> n_grid, std::uint64_t seed);

/// Columns: n, y_mean, y_std.
void write_curve_csv(const SubstitutionCurve& curve, const std::filesystem::path& path);

}  // namespace orprobe
