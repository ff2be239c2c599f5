#include "orprobe/embedstore.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "orprobe/error.hpp"
#include "orprobe/rng.hpp"

namespace orprobe {

std::string EmbeddingSet::path_or_index(std::size_t i) const {
    return paths.empty() ? "row_" + std::to_string(i) : paths[i];
}

void EmbeddingSet::validate() const {
    if (n < 1) throw FormatError("embedding set has no rows");
    if (d < 1) throw FormatError("embedding set has zero feature dimension");
    if (data.size() != n * d) {
        throw FormatError("data holds " + std::to_string(data.size()) + " values, n*d = " +
                          std::to_string(n * d));
    }
    if (angles_deg.size() != n) {
        throw FormatError("expected " + std::to_string(n) + " angles, got " +
                          std::to_string(angles_deg.size()));
    }
    if (!paths.empty() && paths.size() != n) throw FormatError("paths not aligned to rows");
    if (source_shape.empty()) throw FormatError("source_shape is empty");
    std::int64_t prod = 1;
    for (auto s : source_shape) {
        if (s < 1) throw FormatError("source_shape entries must be positive");
        prod *= s;
    }
    if (static_cast<std::size_t>(prod) != d) {
        throw FormatError("product(source_shape) = " + std::to_string(prod) + " but d = " +
                          std::to_string(d));
    }
}

void write_f32_le(std::ostream& out, std::span<const float> values) {
    std::vector<char> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(values[i]);
        for (int b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void read_f32_le(std::istream& in, std::span<float> values, const std::string& what) {
    std::vector<unsigned char> buf(values.size() * 4);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
        throw FormatError(what + ": truncated payload (" + std::to_string(in.gcount()) +
                          " of " + std::to_string(buf.size()) + " bytes)");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(buf[i * 4 + b]) << (8 * b);
        values[i] = std::bit_cast<float>(bits);
    }
}

void write_set(const EmbeddingSet& set, const std::filesystem::path& path) {
    set.validate();
    nlohmann::json header = {
        {"magic", kEmbeddingMagic}, {"n", set.n},
        {"d", set.d},               {"source_shape", set.source_shape},
        {"set_id", set.set_id},     {"angles", set.angles_deg},
    };
    if (!set.paths.empty()) header["paths"] = set.paths;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    out << header.dump() << '\n';
    write_f32_le(out, set.data);
    if (!out) throw Error("write failed: " + path.string());
}

EmbeddingSet read_set(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");

    EmbeddingSet set;
    try {
        const auto header = nlohmann::json::parse(line);
        if (!header.is_object() || header.value("magic", "") != kEmbeddingMagic) {
            throw FormatError(path.string() + ": magic mismatch");
        }
        set.n = header.at("n").get<std::size_t>();
        set.d = header.at("d").get<std::size_t>();
        set.source_shape = header.at("source_shape").get<std::vector<std::int64_t>>();
        set.set_id = header.at("set_id").get<std::string>();
        set.angles_deg = header.at("angles").get<std::vector<double>>();
        if (header.contains("paths")) set.paths = header.at("paths").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": malformed header: " + e.what());
    }
    if (set.angles_deg.size() != set.n) {
        throw FormatError(path.string() + ": " + std::to_string(set.angles_deg.size()) +
                          " angles for n = " + std::to_string(set.n));
    }
    if (set.n == 0 || set.d == 0) throw FormatError(path.string() + ": empty set");

    set.data.resize(set.n * set.d);
    read_f32_le(in, set.data, path.string());
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError(path.string() + ": trailing bytes after payload");
    }
    set.validate();
    return set;
}

void write_labels_csv(const EmbeddingSet& set, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    out.precision(17);
    out << "path,angle_deg\n";
    for (std::size_t i = 0; i < set.n; ++i) out << set.path_or_index(i) << ',' << set.angles_deg[i] << '\n';
}

SplitIndex split_80_20(const EmbeddingSet& set, std::uint64_t seed) {
    if (set.n < 5) throw InvalidInput("80:20 split needs at least 5 rows, got " + std::to_string(set.n));
    const auto perm = seeded_permutation(set.n, seed);
    const auto n_train = static_cast<std::size_t>(std::lround(0.8 * static_cast<double>(set.n)));
    SplitIndex split;
    split.seed = seed;
    split.train_rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test_rows.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    return split;
}

NormStats normalize_fit(const EmbeddingSet& set, std::span<const std::size_t> train_rows) {
    if (train_rows.empty()) throw InvalidInput("normalize_fit: no training rows");
    const std::size_t d = set.d;
    const auto m = static_cast<double>(train_rows.size());
    NormStats stats{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0),
                    std::vector<bool>(d, false)};
    std::vector<bool> varies(d, false);
    const auto first = set.row(train_rows[0]);

    for (auto r : train_rows) {
        const auto x = set.row(r);
        for (std::size_t j = 0; j < d; ++j) {
            stats.mean[j] += x[j];
            if (x[j] != first[j]) varies[j] = true;
        }
    }
    for (auto& v : stats.mean) v /= m;
    for (auto r : train_rows) {
        const auto x = set.row(r);
        for (std::size_t j = 0; j < d; ++j) {
            const double dev = x[j] - stats.mean[j];
            stats.std[j] += dev * dev;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        // Constant columns get exactly zero, not rounding residue.
        stats.std[j] = varies[j] ? std::sqrt(stats.std[j] / m) : 0.0;
        if (!varies[j]) stats.mean[j] = first[j];
        stats.zero_variance_mask[j] = stats.std[j] == 0.0;
    }
    return stats;
}

void normalize_vector(std::span<float> x, const NormStats& stats) {
    if (x.size() != stats.mean.size()) {
        throw InvalidInput("normalize: vector has " + std::to_string(x.size()) +
                           " features, stats have " + std::to_string(stats.mean.size()));
    }
    for (std::size_t j = 0; j < x.size(); ++j) {
        x[j] = stats.zero_variance_mask[j]
                   ? 0.0f
                   : static_cast<float>((static_cast<double>(x[j]) - stats.mean[j]) / stats.std[j]);
    }
}

EmbeddingSet normalize_apply(const EmbeddingSet& set, const NormStats& stats) {
    EmbeddingSet out = set;
    for (std::size_t i = 0; i < out.n; ++i) normalize_vector(out.row(i), stats);
    return out;
}

EmbeddingSet select_rows(const EmbeddingSet& set, std::span<const std::size_t> rows) {
    EmbeddingSet out;
    out.n = rows.size();
    out.d = set.d;
    out.source_shape = set.source_shape;
    out.set_id = set.set_id;
    out.data.reserve(rows.size() * set.d);
    for (auto r : rows) {
        if (r >= set.n) throw InvalidInput("row index " + std::to_string(r) + " out of range");
        const auto x = set.row(r);
        out.data.insert(out.data.end(), x.begin(), x.end());
        out.angles_deg.push_back(set.angles_deg[r]);
        if (!set.paths.empty()) out.paths.push_back(set.paths[r]);
    }
    return out;
}

}  // namespace orprobe
