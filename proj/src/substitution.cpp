#include "orprobe/substitution.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "orprobe/circstats.hpp"
#include "orprobe/error.hpp"
#include "orprobe/rng.hpp"

namespace orprobe {

namespace {

std::vector<std::size_t> order_by_score_desc(const std::vector<double>& score) {
    std::vector<std::size_t> idx(score.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    return idx;
}

}  // namespace

std::string_view to_string(SelectionMode m) {
    switch (m) {
        case SelectionMode::ByWeight: return "BY_WEIGHT";
        case SelectionMode::ByAbsDiff: return "BY_ABSDIFF";
        case SelectionMode::Random: return "RANDOM";
    }
    return "?";
}

SelectionMode parse_selection_mode(std::string_view s) {
    for (auto m : {SelectionMode::ByWeight, SelectionMode::ByAbsDiff, SelectionMode::Random}) {
        if (to_string(m) == s) return m;
    }
    throw InvalidInput("unknown selection mode '" + std::string(s) + "'");
}

FeatureRanking rank_features(const CircularProbe* probe, std::span<const float> anchor,
                             std::span<const float> target, SelectionMode mode,
                             std::uint64_t seed, std::size_t d) {
    FeatureRanking r{mode, {}, seed};
    switch (mode) {
        case SelectionMode::ByWeight: {
            if (probe == nullptr) throw InvalidInput("BY_WEIGHT ranking needs a probe");
            std::vector<double> score(probe->dim());
            for (std::size_t j = 0; j < score.size(); ++j) {
                score[j] = std::abs(probe->w_sin[j]) + std::abs(probe->w_cos[j]);
            }
            r.indices = order_by_score_desc(score);
            break;
        }
        case SelectionMode::ByAbsDiff: {
            if (anchor.empty() || target.empty()) {
                throw InvalidInput("BY_ABSDIFF ranking needs anchor and target vectors");
            }
            if (anchor.size() != target.size()) throw InvalidInput("anchor/target length mismatch");
            std::vector<double> score(anchor.size());
            for (std::size_t j = 0; j < score.size(); ++j) {
                score[j] = std::abs(static_cast<double>(anchor[j]) - static_cast<double>(target[j]));
            }
            r.indices = order_by_score_desc(score);
            break;
        }
        case SelectionMode::Random: {
            std::size_t dim = d;
            if (dim == 0) dim = probe ? probe->dim() : (anchor.empty() ? target.size() : anchor.size());
            if (dim == 0) throw InvalidInput("RANDOM ranking needs a feature dimension");
            r.indices = seeded_permutation(dim, seed);
            break;
        }
    }
    return r;
}

std::vector<float> substitute(std::span<const float> target, std::span<const float> anchor,
                              const FeatureRanking& ranking, std::size_t n) {
    if (target.size() != anchor.size()) throw InvalidInput("anchor/target length mismatch");
    if (ranking.indices.size() != target.size()) throw InvalidInput("ranking length mismatch");
    if (n > target.size()) {
        throw InvalidInput("cannot substitute " + std::to_string(n) + " of " +
                           std::to_string(target.size()) + " features");
    }
    std::vector<float> out(target.begin(), target.end());
    for (std::size_t i = 0; i < n; ++i) out[ranking.indices[i]] = anchor[ranking.indices[i]];
    return out;
}

double y_ratio(double pred_deg, double anchor_deg, double target_true_deg) {
    const double denom = circ_diff(target_true_deg, anchor_deg);
    if (denom == 0.0) throw ExcludedSample("target shares the anchor orientation");
    return circ_diff(pred_deg, anchor_deg) / denom;
}

std::vector<std::size_t> default_n_grid(std::size_t d, int points) {
    std::vector<std::size_t> grid{0};
    if (d >= 1 && points > 1) {
        const double top = std::log(static_cast<double>(d));
        for (int i = 0; i < points; ++i) {
            const double v = std::exp(top * i / (points - 1));
            grid.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(v)), 1, d));
        }
    }
    grid.push_back(d);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

std::optional<std::size_t> convergence_threshold(std::span<const std::size_t> n_grid,
                                                 std::span<const double> y_mean, double band) {
    std::optional<std::size_t> threshold;
    for (std::size_t i = n_grid.size(); i-- > 0;) {
        if (!(std::abs(y_mean[i]) <= band)) break;
        threshold = n_grid[i];
    }
    return threshold;
}

SubstitutionCurve convergence_curve(const CircularProbe& probe, const AnchorRecord& anchor,
                                    const EmbeddingSet& normalized,
                                    std::span<const std::size_t> target_rows, SelectionMode mode,
                                    std::span<const std::size_t> n_grid, std::uint64_t seed) {
    const std::size_t d = probe.dim();
    if (anchor.features.size() != d || normalized.d != d) {
        throw InvalidInput("probe, anchor and targets must share the feature dimension");
    }
    if (n_grid.empty()) throw InvalidInput("empty n grid");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] > d) throw InvalidInput("n grid exceeds feature dimension");
        if (i > 0 && n_grid[i] <= n_grid[i - 1]) throw InvalidInput("n grid must be strictly increasing");
    }

    SubstitutionCurve curve;
    curve.mode = mode;
    curve.anchor_angle_deg = anchor.angle_deg;
    curve.n_grid.assign(n_grid.begin(), n_grid.end());

    std::optional<FeatureRanking> shared;
    if (mode != SelectionMode::ByAbsDiff) {
        shared = rank_features(&probe, anchor.features, {}, mode, seed, d);
    }

    for (auto row : target_rows) {
        if (row >= normalized.n) throw InvalidInput("target row out of range");
        if (anchor.row && *anchor.row == row) continue;
        const double truth = normalized.angles_deg[row];
        if (circ_diff(truth, anchor.angle_deg) == 0.0) continue;

        const auto target = normalized.row(row);
        const FeatureRanking ranking =
            shared ? *shared : rank_features(&probe, anchor.features, target, mode, seed, d);

        // Predictions are affine in the features, so substituting one more
        // feature moves (s, c) by w_j (anchor_j - target_j).
        auto [s, c] = predict_raw(probe, target);
        std::vector<double> ys;
        ys.reserve(n_grid.size());
        std::size_t done = 0;
        for (auto n : n_grid) {
            for (; done < n; ++done) {
                const auto j = ranking.indices[done];
                const double delta = static_cast<double>(anchor.features[j]) - target[j];
                s += probe.w_sin[j] * delta;
                c += probe.w_cos[j] * delta;
            }
            ys.push_back(y_ratio(decode_angle(s, c), anchor.angle_deg, truth));
        }
        curve.y_per_target.push_back(std::move(ys));
        curve.target_rows.push_back(row);
    }
    if (curve.y_per_target.empty()) throw InvalidInput("no usable targets for the substitution curve");

    const auto t = static_cast<double>(curve.y_per_target.size());
    for (std::size_t g = 0; g < n_grid.size(); ++g) {
        double sum = 0.0;
        for (const auto& ys : curve.y_per_target) sum += ys[g];
        const double mean = sum / t;
        double ss = 0.0;
        for (const auto& ys : curve.y_per_target) ss += (ys[g] - mean) * (ys[g] - mean);
        curve.y_mean.push_back(mean);
        curve.y_std.push_back(std::sqrt(ss / t));
    }
    curve.threshold_n = convergence_threshold(curve.n_grid, curve.y_mean);
    return curve;
}

void write_curve_csv(const SubstitutionCurve& curve, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    out.precision(17);
    out << "n,y_mean,y_std\n";
    for (std::size_t i = 0; i < curve.n_grid.size(); ++i) {
        out << curve.n_grid[i] << ',' << curve.y_mean[i] << ',' << curve.y_std[i] << '\n';
    }
}

}  // namespace orprobe
