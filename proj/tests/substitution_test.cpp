#include "orprobe/substitution.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "orprobe/circstats.hpp"
#include "orprobe/error.hpp"
#include "orprobe/synthoracle.hpp"

namespace orprobe {
namespace {

CircularProbe weights_probe(std::vector<double> ws, std::vector<double> wc) {
    CircularProbe p;
    p.w_sin = std::move(ws);
    p.w_cos = std::move(wc);
    p.alpha_sin = p.alpha_cos = 1.0;
    return p;
}

TEST(Rank, ByWeightExample) {
    const auto p = weights_probe({0, 3, 1}, {0, 0, 1});
    const auto r = rank_features(&p, {}, {}, SelectionMode::ByWeight, 0);
    EXPECT_EQ(r.indices, (std::vector<std::size_t>{1, 2, 0}));
}

TEST(Rank, ByWeightUsesAbsoluteValuesAndBreaksTiesByIndex) {
    const auto p = weights_probe({-2, 1, 0, 1}, {0, 1, -2, -1});
    const auto r = rank_features(&p, {}, {}, SelectionMode::ByWeight, 0);
    EXPECT_EQ(r.indices, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(Rank, ByAbsDiffExample) {
    const std::vector<float> anchor = {1, 1}, target = {1, 5};
    const auto r = rank_features(nullptr, anchor, target, SelectionMode::ByAbsDiff, 0);
    EXPECT_EQ(r.indices, (std::vector<std::size_t>{1, 0}));
}

TEST(Rank, RandomIsSeededPermutation) {
    const auto a = rank_features(nullptr, {}, {}, SelectionMode::Random, 42, 500);
    const auto b = rank_features(nullptr, {}, {}, SelectionMode::Random, 42, 500);
    const auto c = rank_features(nullptr, {}, {}, SelectionMode::Random, 43, 500);
    EXPECT_EQ(a.indices, b.indices);
    EXPECT_NE(a.indices, c.indices);
    auto sorted = a.indices;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Rank, MissingInputsAreInvalid) {
    EXPECT_THROW(rank_features(nullptr, {}, {}, SelectionMode::ByWeight, 0), InvalidInput);
    const std::vector<float> a = {1, 2};
    EXPECT_THROW(rank_features(nullptr, a, {}, SelectionMode::ByAbsDiff, 0), InvalidInput);
    EXPECT_THROW(rank_features(nullptr, {}, {}, SelectionMode::Random, 0), InvalidInput);
}

TEST(Substitute, Examples) {
    const std::vector<float> target = {1, 2, 3}, anchor = {9, 9, 9};
    FeatureRanking r;
    r.indices = {2, 0, 1};
    EXPECT_EQ(substitute(target, anchor, r, 0), target);
    EXPECT_EQ(substitute(target, anchor, r, 3), anchor);
    EXPECT_EQ(substitute(target, anchor, r, 1), (std::vector<float>{1, 2, 9}));
    EXPECT_THROW(substitute(target, anchor, r, 4), InvalidInput);
}

TEST(YRatio, Examples) {
    EXPECT_EQ(y_ratio(29, 9, 29), 1.0);
    EXPECT_EQ(y_ratio(9, 9, 29), 0.0);
    EXPECT_EQ(y_ratio(19, 9, 29), 0.5);
    // Across the wrap: anchor 350, target 10, pred 0 -> halfway.
    EXPECT_EQ(y_ratio(0, 350, 10), 0.5);
    EXPECT_THROW(y_ratio(5, 9, 9), ExcludedSample);
    EXPECT_THROW(y_ratio(5, 9, 369), ExcludedSample);
}

TEST(Grid, DefaultGridShape) {
    const auto g = default_n_grid(10000);
    EXPECT_EQ(g.front(), 0u);
    EXPECT_EQ(g[1], 1u);
    EXPECT_EQ(g.back(), 10000u);
    // 10000^(i/29) rounds to 1, 1, 2, 3, ...; the duplicate collapses.
    std::set<std::size_t> expect = {0};
    for (int i = 0; i < 30; ++i) expect.insert(static_cast<std::size_t>(std::llround(std::pow(10000.0, i / 29.0))));
    EXPECT_EQ(g, std::vector<std::size_t>(expect.begin(), expect.end()));
    EXPECT_EQ(g.size(), 30u);
    EXPECT_TRUE(std::is_sorted(g.begin(), g.end()));
    EXPECT_EQ(std::adjacent_find(g.begin(), g.end()), g.end());
    const auto small = default_n_grid(5);
    EXPECT_EQ(small, (std::vector<std::size_t>{0, 1, 2, 3, 4, 5}));
}

TEST(Threshold, SustainedBandRule) {
    const std::vector<std::size_t> n = {0, 1, 10, 100, 1000};
    EXPECT_EQ(convergence_threshold(n, std::vector<double>{1, 0.05, 0.5, 0.08, 0.0}), 100u);
    EXPECT_EQ(convergence_threshold(n, std::vector<double>{1, 0.1, -0.1, 0.0, 0.0}), 1u);
    EXPECT_EQ(convergence_threshold(n, std::vector<double>{1, 1, 1, 1, 0.2}), std::nullopt);
    EXPECT_EQ(convergence_threshold(n, std::vector<double>{1, 1, 1, -0.3, 0.0}), 1000u);
}

struct Setup {
    PlantedSet planted;
    EmbeddingSet normalized;
    CircularProbe probe;
    SplitIndex split;
    AnchorRecord anchor;
};

Setup make_setup(const PlantSpec& spec) {
    Setup s;
    s.planted = gen_planted_set(spec);
    s.split = split_80_20(s.planted.set, 3);
    const auto norm = normalize_fit(s.planted.set, s.split.train_rows);
    s.normalized = normalize_apply(s.planted.set, norm);
    s.probe = fit_probe(s.normalized, s.split.train_rows, norm, CvConfig{});
    const auto it = std::find(s.normalized.angles_deg.begin(), s.normalized.angles_deg.end(), 9.0);
    const auto row = static_cast<std::size_t>(it - s.normalized.angles_deg.begin());
    const auto x = s.normalized.row(row);
    s.anchor = {std::vector<float>(x.begin(), x.end()), 9.0, row};
    return s;
}

TEST(Curve, MatchesDirectSubstitutionOracle) {
    PlantSpec spec;
    spec.d = 300;
    spec.k_active = 300;
    spec.noise_sigma = 0.2;
    spec.seed = 1;
    const auto s = make_setup(spec);
    const auto grid = default_n_grid(spec.d, 12);
    for (auto mode : {SelectionMode::ByWeight, SelectionMode::ByAbsDiff, SelectionMode::Random}) {
        const auto curve = convergence_curve(s.probe, s.anchor, s.normalized, s.split.test_rows, mode, grid, 5);
        ASSERT_EQ(curve.target_rows.size(), curve.y_per_target.size());
        for (std::size_t t = 0; t < curve.target_rows.size(); ++t) {
            const auto row = curve.target_rows[t];
            const auto target = s.normalized.row(row);
            const auto ranking = rank_features(&s.probe, s.anchor.features, target, mode, 5, spec.d);
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const auto x = substitute(target, s.anchor.features, ranking, grid[g]);
                const double pred = predict_angle(s.probe, x);
                const double y = y_ratio(pred, 9.0, s.normalized.angles_deg[row]);
                EXPECT_NEAR(curve.y_per_target[t][g], y, 1e-9);
            }
        }
    }
}

TEST(Curve, EndpointsOnAccurateProbe) {
    PlantSpec spec;
    spec.d = 400;
    spec.k_active = 400;
    spec.seed = 2;
    const auto s = make_setup(spec);
    const auto grid = default_n_grid(spec.d);
    for (auto mode : {SelectionMode::ByWeight, SelectionMode::ByAbsDiff, SelectionMode::Random}) {
        const auto c = convergence_curve(s.probe, s.anchor, s.normalized, s.split.test_rows, mode, grid, 1);
        EXPECT_LT(std::abs(c.y_mean.front() - 1.0), 0.05);
        EXPECT_LT(std::abs(c.y_mean.back()), 0.05);
        EXPECT_GE(c.y_mean.front(), c.y_mean.back());
        ASSERT_TRUE(c.threshold_n.has_value());
        EXPECT_NE(std::find(grid.begin(), grid.end(), *c.threshold_n), grid.end());
    }
}

TEST(Curve, SkipsAnchorRowAndAnchorAngle) {
    PlantSpec spec;
    spec.d = 50;
    spec.k_active = 50;
    spec.seed = 3;
    const auto s = make_setup(spec);
    std::vector<std::size_t> rows(s.normalized.n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const std::vector<std::size_t> grid = {0, 50};
    const auto c = convergence_curve(s.probe, s.anchor, s.normalized, rows, SelectionMode::ByWeight, grid, 0);
    EXPECT_EQ(c.target_rows.size(), s.normalized.n - 1);
    EXPECT_EQ(std::count(c.target_rows.begin(), c.target_rows.end(), *s.anchor.row), 0);
    const std::vector<std::size_t> only_anchor = {*s.anchor.row};
    EXPECT_THROW(convergence_curve(s.probe, s.anchor, s.normalized, only_anchor, SelectionMode::ByWeight, grid, 0),
                 InvalidInput);
    const std::vector<std::size_t> bad_grid = {0, 60};
    EXPECT_THROW(convergence_curve(s.probe, s.anchor, s.normalized, rows, SelectionMode::ByWeight, bad_grid, 0),
                 InvalidInput);
}

TEST(Curve, DeterministicPerSeed) {
    PlantSpec spec;
    spec.d = 200;
    spec.k_active = 200;
    spec.noise_sigma = 0.1;
    spec.seed = 4;
    const auto s = make_setup(spec);
    const auto grid = default_n_grid(spec.d);
    const auto a = convergence_curve(s.probe, s.anchor, s.normalized, s.split.test_rows, SelectionMode::Random, grid, 9);
    const auto b = convergence_curve(s.probe, s.anchor, s.normalized, s.split.test_rows, SelectionMode::Random, grid, 9);
    EXPECT_EQ(a.y_per_target, b.y_per_target);
    EXPECT_EQ(a.y_mean, b.y_mean);
    EXPECT_EQ(a.threshold_n, b.threshold_n);
}

TEST(Curve, SparsePlantRankedFirstByWeight) {
    PlantSpec spec;
    spec.d = 2000;
    spec.k_active = 20;
    spec.seed = 5;
    const auto s = make_setup(spec);
    const auto r = rank_features(&s.probe, {}, {}, SelectionMode::ByWeight, 0);
    const std::set<std::size_t> top(r.indices.begin(), r.indices.begin() + 20);
    const std::set<std::size_t> active(s.planted.truth.active_idx.begin(), s.planted.truth.active_idx.end());
    EXPECT_EQ(top, active);
}

TEST(Curve, CsvColumns) {
    SubstitutionCurve c;
    c.n_grid = {0, 5};
    c.y_mean = {1.0, 0.0};
    c.y_std = {0.1, 0.0};
    const auto path = std::filesystem::temp_directory_path() / "orprobe_curve_test.csv";
    write_curve_csv(c, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "n,y_mean,y_std");
    std::getline(in, line);
    EXPECT_EQ(line, "0,1,0.10000000000000001");
}

TEST(Mode, StringRoundTrip) {
    for (auto m : {SelectionMode::ByWeight, SelectionMode::ByAbsDiff, SelectionMode::Random})
        EXPECT_EQ(parse_selection_mode(to_string(m)), m);
    EXPECT_EQ(to_string(SelectionMode::ByAbsDiff), "BY_ABSDIFF");
    EXPECT_THROW(parse_selection_mode("BY_MAGIC"), InvalidInput);
}

}  // namespace
}  // namespace orprobe
