#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "orprobe/embedstore.hpp"
#include "orprobe/imagegen.hpp"

namespace orprobe {

/// Synthetic embeddings whose orientation signal is exactly linear in
/// (sin, cos) on a known subset of features.
struct PlantSpec {
    std::size_t d = 1000;
    int n_angles = 180;
    double angle_step = 1.0;
    double angle_start = 0.0;
    std::size_t k_active = 1000;
    double signal_scale = 1.0;
    double noise_sigma = 0.0;       // on active features
    double distractor_sigma = 0.0;  // on all other features
    std::uint64_t seed = 0;

    void validate() const;
};

struct PlantedTruth {
    std::vector<std::size_t> active_idx;  // feature receiving row r of the loading matrix
    std::vector<double> loading;          // k_active x 2, row-major (sin, cos)
    std::vector<double> offset;           // d
};

struct PlantedSet {
    EmbeddingSet set;
    PlantedTruth truth;
};

/// x(theta) = offset + P A (sin theta, cos theta)^T + eps. The scatter P is
/// a seeded permutation, loadings are N(0, signal_scale^2), offsets are
/// N(0, 1). Structure and noise come from separate streams of the seed so
/// changing a sigma leaves everything else fixed.
PlantedSet gen_planted_set(const PlantSpec& spec);

/// Foreground signal plus a second, independent "background" signal. The
/// condition decides which one follows the row angle; the other stays at 0.
struct ConditionPlantSpec {
    PlantSpec fg;
    std::size_t bg_k_active = 1000;
    double bg_scale = 2.0;
};

EmbeddingSet gen_condition_set(const ConditionPlantSpec& spec, Condition condition);

}  // namespace orprobe
