#include "orprobe/synthoracle.hpp"

#include <cmath>
#include <numbers>
#include <functional>
#include <string>

#include "orprobe/error.hpp"
#include "orprobe/rng.hpp"

namespace orprobe {

namespace {

constexpr std::uint64_t kNoiseStream = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kBgStream = 0xC2B2AE3D27D4EB4FULL;

struct Layer {
    std::vector<std::size_t> idx;
    std::vector<double> loading;  // k x 2
};

Layer draw_layer(std::size_t d, std::size_t k, double scale, std::uint64_t seed, Rng& rng) {
    Layer layer;
    const auto perm = seeded_permutation(d, seed);
    layer.idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
    layer.loading.resize(2 * k);
    for (auto& v : layer.loading) v = scale * rng.normal();
    return layer;
}

EmbeddingSet empty_set(const PlantSpec& spec, const std::string& set_id) {
    EmbeddingSet set;
    set.n = static_cast<std::size_t>(spec.n_angles);
    set.d = spec.d;
    set.source_shape = {static_cast<std::int64_t>(spec.d)};
    set.set_id = set_id;
    set.data.assign(set.n * set.d, 0.0f);
    for (int i = 0; i < spec.n_angles; ++i) {
        double a = std::fmod(spec.angle_start + i * spec.angle_step, 360.0);
        if (a < 0.0) a += 360.0;
        set.angles_deg.push_back(a);
    }
    return set;
}

// Row = offset + layers + noise, accumulated in double then stored as float.
void fill_rows(EmbeddingSet& set, const PlantSpec& spec, const std::vector<double>& offset,
               const std::vector<bool>& active, std::uint64_t noise_seed,
               const std::function<void(std::size_t, std::vector<double>&)>& add_signal) {
    Rng noise(noise_seed);
    std::vector<double> acc(set.d);
    for (std::size_t i = 0; i < set.n; ++i) {
        acc = offset;
        add_signal(i, acc);
        for (std::size_t j = 0; j < set.d; ++j) {
            const double z = noise.normal();
            acc[j] += (active[j] ? spec.noise_sigma : spec.distractor_sigma) * z;
        }
        auto row = set.row(i);
        for (std::size_t j = 0; j < set.d; ++j) row[j] = static_cast<float>(acc[j]);
    }
}

void add_layer_d(std::vector<double>& acc, const Layer& layer, double theta_deg) {
    const double r = theta_deg * std::numbers::pi / 180.0;
    const double s = std::sin(r), c = std::cos(r);
    for (std::size_t a = 0; a < layer.idx.size(); ++a) {
        acc[layer.idx[a]] += layer.loading[2 * a] * s + layer.loading[2 * a + 1] * c;
    }
}

}  // namespace

void PlantSpec::validate() const {
    if (d < 1) throw InvalidInput("plant spec: d must be >= 1");
    if (n_angles < 1) throw InvalidInput("plant spec: n_angles must be >= 1");
    if (k_active < 1 || k_active > d) throw InvalidInput("plant spec: k_active must lie in [1, d]");
    if (!(noise_sigma >= 0.0) || !(distractor_sigma >= 0.0) || !(signal_scale >= 0.0)) {
        throw InvalidInput("plant spec: scales and sigmas must be >= 0");
    }
    if (!(angle_step > 0.0)) throw InvalidInput("plant spec: angle_step must be > 0");
}

PlantedSet gen_planted_set(const PlantSpec& spec) {
    spec.validate();
    Rng structure(spec.seed);
    std::vector<double> offset(spec.d);
    for (auto& v : offset) v = structure.normal();
    const Layer fg = draw_layer(spec.d, spec.k_active, spec.signal_scale, spec.seed + 1, structure);

    std::vector<bool> active(spec.d, false);
    for (auto j : fg.idx) active[j] = true;

    PlantedSet out;
    out.set = empty_set(spec, "planted_" + std::to_string(spec.seed));
    const auto& angles = out.set.angles_deg;
    fill_rows(out.set, spec, offset, active, spec.seed ^ kNoiseStream,
              [&](std::size_t i, std::vector<double>& acc) { add_layer_d(acc, fg, angles[i]); });

    out.truth.active_idx = fg.idx;
    out.truth.loading = fg.loading;
    out.truth.offset = std::move(offset);
    return out;
}

EmbeddingSet gen_condition_set(const ConditionPlantSpec& spec, Condition condition) {
    const PlantSpec& base = spec.fg;
    base.validate();
    if (spec.bg_k_active < 1 || spec.bg_k_active > base.d) {
        throw InvalidInput("plant spec: bg_k_active must lie in [1, d]");
    }
    Rng structure(base.seed);
    std::vector<double> offset(base.d);
    for (auto& v : offset) v = structure.normal();
    const Layer fg = draw_layer(base.d, base.k_active, base.signal_scale, base.seed + 1, structure);
    const Layer bg = draw_layer(base.d, spec.bg_k_active, spec.bg_scale, base.seed ^ kBgStream, structure);

    std::vector<bool> active(base.d, false);
    for (auto j : fg.idx) active[j] = true;
    for (auto j : bg.idx) active[j] = true;

    EmbeddingSet set = empty_set(base, "planted_" + std::string(to_string(condition)) + "_" +
                                           std::to_string(base.seed));
    const auto& angles = set.angles_deg;
    const bool fg_moves = condition != Condition::BgOnly;
    const bool bg_moves = condition != Condition::FgOnly;
    const auto noise_seed = (base.seed ^ kNoiseStream) + static_cast<std::uint64_t>(condition) + 1;
    fill_rows(set, base, offset, active, noise_seed, [&](std::size_t i, std::vector<double>& acc) {
        add_layer_d(acc, fg, fg_moves ? angles[i] : 0.0);
        add_layer_d(acc, bg, bg_moves ? angles[i] : 0.0);
    });
    return set;
}

}  // namespace orprobe
