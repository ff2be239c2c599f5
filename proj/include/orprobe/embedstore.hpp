#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace orprobe {

/// n x d row-major float32 features with one orientation label per row.
struct EmbeddingSet {
    std::size_t n = 0;
    std::size_t d = 0;
    std::vector<float> data;
    std::vector<double> angles_deg;
    std::vector<std::int64_t> source_shape;
    std::string set_id;
    // Optional provenance; either empty or one entry per row.
    std::vector<std::string> paths;

    std::span<const float> row(std::size_t i) const { return {data.data() + i * d, d}; }
    std::span<float> row(std::size_t i) { return {data.data() + i * d, d}; }

    std::string path_or_index(std::size_t i) const;

    /// Throws FormatError when the shape fields disagree.
    void validate() const;

    bool operator==(const EmbeddingSet&) const = default;
};

struct SplitIndex {
    std::vector<std::size_t> train_rows;
    std::vector<std::size_t> test_rows;
    std::uint64_t seed = 0;

    bool operator==(const SplitIndex&) const = default;
};

struct NormStats {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<bool> zero_variance_mask;
};

inline constexpr const char* kEmbeddingMagic = "ORPB1";

// .orpb layout: one line of UTF-8 JSON (the header, newline-terminated)
// followed by n*d little-endian float32 values.
void write_set(const EmbeddingSet& set, const std::filesystem::path& path);
EmbeddingSet read_set(const std::filesystem::path& path);

/// Sidecar `path,angle_deg` CSV for interop with external tooling.
void write_labels_csv(const EmbeddingSet& set, const std::filesystem::path& path);

/// Seeded shuffle; the first round(0.8 n) shuffled rows train.
SplitIndex split_80_20(const EmbeddingSet& set, std::uint64_t seed);

/// Per-feature mean and population std over the given rows.
NormStats normalize_fit(const EmbeddingSet& set, std::span<const std::size_t> train_rows);
EmbeddingSet normalize_apply(const EmbeddingSet& set, const NormStats& stats);

/// z-scores one vector in place; zero-variance features become 0.
void normalize_vector(std::span<float> x, const NormStats& stats);

/// Copy of the listed rows, in order.
EmbeddingSet select_rows(const EmbeddingSet& set, std::span<const std::size_t> rows);

// Little-endian float32 block I/O shared with the probe format.
void write_f32_le(std::ostream& out, std::span<const float> values);
void read_f32_le(std::istream& in, std::span<float> values, const std::string& what);

}  // namespace orprobe
