#include "orprobe/synthoracle.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "orprobe/error.hpp"
#include "orprobe/probe.hpp"

namespace orprobe {
namespace {

ProbeReport probe_mae(const EmbeddingSet& set, std::uint64_t split_seed, CircularProbe* out = nullptr) {
    const auto split = split_80_20(set, split_seed);
    const auto norm = normalize_fit(set, split.train_rows);
    const auto normalized = normalize_apply(set, norm);
    auto probe = fit_probe(normalized, split.train_rows, norm, CvConfig{});
    auto report = evaluate(probe, normalized, split.test_rows);
    if (out) *out = std::move(probe);
    return report;
}

std::size_t varying_columns(const EmbeddingSet& s) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < s.d; ++j) {
        for (std::size_t i = 1; i < s.n; ++i) {
            if (s.row(i)[j] != s.row(0)[j]) {
                ++count;
                break;
            }
        }
    }
    return count;
}

TEST(Planted, ReproducibleAndSeedSensitive) {
    PlantSpec spec;
    spec.d = 300;
    spec.k_active = 40;
    spec.noise_sigma = 0.5;
    spec.distractor_sigma = 0.2;
    spec.seed = 7;
    const auto a = gen_planted_set(spec);
    const auto b = gen_planted_set(spec);
    EXPECT_EQ(a.set.data, b.set.data);
    EXPECT_EQ(a.set.angles_deg, b.set.angles_deg);
    EXPECT_EQ(a.truth.active_idx, b.truth.active_idx);
    spec.seed = 8;
    EXPECT_NE(gen_planted_set(spec).set.data, a.set.data);
}

TEST(Planted, ZeroNoiseRowsMatchGroundTruthFormula) {
    PlantSpec spec;
    spec.d = 64;
    spec.k_active = 10;
    spec.signal_scale = 3.0;
    spec.n_angles = 36;
    spec.angle_step = 10;
    spec.seed = 2;
    const auto p = gen_planted_set(spec);
    ASSERT_EQ(p.truth.active_idx.size(), 10u);
    ASSERT_EQ(p.truth.loading.size(), 20u);
    EXPECT_EQ(std::set<std::size_t>(p.truth.active_idx.begin(), p.truth.active_idx.end()).size(), 10u);
    for (std::size_t i = 0; i < p.set.n; ++i) {
        const double r = p.set.angles_deg[i] * M_PI / 180.0;
        std::vector<double> expect = p.truth.offset;
        for (std::size_t a = 0; a < 10; ++a)
            expect[p.truth.active_idx[a]] += p.truth.loading[2 * a] * std::sin(r) + p.truth.loading[2 * a + 1] * std::cos(r);
        for (std::size_t j = 0; j < spec.d; ++j) EXPECT_EQ(p.set.row(i)[j], static_cast<float>(expect[j]));
        EXPECT_EQ(p.set.angles_deg[i], 10.0 * i);
    }
    EXPECT_EQ(varying_columns(p.set), 10u);
}

TEST(Planted, NoiseLevelDoesNotChangeStructure) {
    PlantSpec spec;
    spec.d = 100;
    spec.k_active = 30;
    spec.seed = 3;
    const auto clean = gen_planted_set(spec);
    spec.noise_sigma = 2.0;
    spec.distractor_sigma = 1.0;
    const auto noisy = gen_planted_set(spec);
    EXPECT_EQ(clean.truth.active_idx, noisy.truth.active_idx);
    EXPECT_EQ(clean.truth.loading, noisy.truth.loading);
    EXPECT_EQ(clean.truth.offset, noisy.truth.offset);
}

TEST(Planted, LoadingsAreGaussianAtSignalScale) {
    PlantSpec spec;
    spec.d = 20000;
    spec.k_active = 20000;
    spec.signal_scale = 2.5;
    spec.n_angles = 1;
    spec.seed = 4;
    const auto p = gen_planted_set(spec);
    double m = 0, ss = 0;
    for (double v : p.truth.loading) m += v;
    m /= p.truth.loading.size();
    for (double v : p.truth.loading) ss += (v - m) * (v - m);
    EXPECT_NEAR(m, 0.0, 0.05);
    EXPECT_NEAR(std::sqrt(ss / p.truth.loading.size()), 2.5, 0.05);
}

TEST(Planted, ZeroNoiseFullyActiveProbeIsExact) {
    PlantSpec spec;
    spec.d = 1000;
    spec.k_active = 1000;
    spec.seed = 5;
    EXPECT_LT(probe_mae(gen_planted_set(spec).set, 1).mae_deg, 0.1);
}

TEST(Planted, SignalIsolation) {
    PlantSpec spec;
    spec.d = 3000;
    spec.k_active = 50;
    spec.seed = 6;
    const auto p = gen_planted_set(spec);
    CircularProbe probe;
    probe_mae(p.set, 2, &probe);
    std::vector<bool> active(spec.d, false);
    for (auto j : p.truth.active_idx) active[j] = true;
    double max_w = 0;
    for (std::size_t j = 0; j < spec.d; ++j) max_w = std::max({max_w, std::abs(probe.w_sin[j]), std::abs(probe.w_cos[j])});
    ASSERT_GT(max_w, 0.0);
    for (std::size_t j = 0; j < spec.d; ++j) {
        if (active[j]) continue;
        EXPECT_LT(std::abs(probe.w_sin[j]), 1e-6 * max_w);
        EXPECT_LT(std::abs(probe.w_cos[j]), 1e-6 * max_w);
    }
}

TEST(Planted, GracefulDegradation) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        PlantSpec spec;
        spec.d = 500;
        spec.k_active = 500;
        spec.seed = seed;
        double prev = -1;
        for (double sigma : {0.0, 0.1, 1.0, 10.0}) {
            spec.noise_sigma = sigma;
            const double mae = probe_mae(gen_planted_set(spec).set, 3).mae_deg;
            EXPECT_GE(mae, prev) << "seed " << seed << " sigma " << sigma;
            prev = mae;
        }
    }
}

TEST(Planted, ZeroSignalIsChance) {
    double total = 0;
    const int seeds = 12;
    for (int seed = 0; seed < seeds; ++seed) {
        PlantSpec spec;
        spec.d = 200;
        spec.k_active = 200;
        spec.signal_scale = 0.0;
        spec.noise_sigma = 1.0;
        // Chance is 90 only when the labels cover the full circle.
        spec.angle_step = 2.0;
        spec.seed = static_cast<std::uint64_t>(100 + seed);
        total += probe_mae(gen_planted_set(spec).set, seed).mae_deg;
    }
    EXPECT_NEAR(total / seeds, 90.0, 10.0);
}

TEST(Planted, SpecValidation) {
    PlantSpec spec;
    spec.k_active = 0;
    EXPECT_THROW(gen_planted_set(spec), InvalidInput);
    spec.k_active = spec.d + 1;
    EXPECT_THROW(gen_planted_set(spec), InvalidInput);
    spec.k_active = 10;
    spec.noise_sigma = -1;
    EXPECT_THROW(gen_planted_set(spec), InvalidInput);
    spec.noise_sigma = 0;
    spec.angle_step = 0;
    EXPECT_THROW(gen_planted_set(spec), InvalidInput);
}

TEST(Planted, WrapsAnglesIntoRange) {
    PlantSpec spec;
    spec.d = 4;
    spec.k_active = 4;
    spec.angle_start = 350;
    spec.angle_step = 5;
    spec.n_angles = 5;
    const auto p = gen_planted_set(spec);
    EXPECT_EQ(p.set.angles_deg, (std::vector<double>{350, 355, 0, 5, 10}));
}

TEST(Conditions, OnlyTheRotatingLayerVaries) {
    ConditionPlantSpec spec;
    spec.fg.d = 1000;
    spec.fg.k_active = 50;
    spec.bg_k_active = 80;
    spec.fg.n_angles = 20;
    spec.fg.angle_step = 18;
    spec.fg.seed = 9;
    const auto fg = gen_condition_set(spec, Condition::FgOnly);
    const auto bg = gen_condition_set(spec, Condition::BgOnly);
    const auto both = gen_condition_set(spec, Condition::BgFg);
    EXPECT_EQ(varying_columns(fg), 50u);
    EXPECT_EQ(varying_columns(bg), 80u);
    EXPECT_GE(varying_columns(both), 80u);
    EXPECT_LE(varying_columns(both), 130u);
    EXPECT_EQ(fg.angles_deg, bg.angles_deg);
    // Row 0 sits at 0 degrees, where every condition renders the same thing.
    for (std::size_t j = 0; j < 1000; ++j) {
        EXPECT_EQ(fg.row(0)[j], bg.row(0)[j]);
        EXPECT_EQ(fg.row(0)[j], both.row(0)[j]);
    }
}

TEST(Conditions, ProbeTransferFollowsTheRotatingLayer) {
    ConditionPlantSpec spec;
    spec.fg.d = 800;
    spec.fg.k_active = 200;
    spec.bg_k_active = 200;
    spec.fg.seed = 10;
    const auto fg = gen_condition_set(spec, Condition::FgOnly);
    const auto bg = gen_condition_set(spec, Condition::BgOnly);
    EXPECT_LT(probe_mae(fg, 1).mae_deg, 0.5);
    EXPECT_LT(probe_mae(bg, 1).mae_deg, 0.5);
}

}  // namespace
}  // namespace orprobe
