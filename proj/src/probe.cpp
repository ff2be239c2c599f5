#include "orprobe/probe.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "orprobe/circstats.hpp"
#include "orprobe/error.hpp"
#include "orprobe/ridge.hpp"
#include "orprobe/rng.hpp"

namespace orprobe {

void CvConfig::validate() const {
    if (k < 2) throw InvalidInput("cross-validation needs k >= 2 folds");
    if (alpha_grid.empty()) throw InvalidInput("alpha grid is empty");
    for (double a : alpha_grid) {
        if (!(a > 0.0) || !std::isfinite(a)) throw InvalidInput("alpha grid values must be > 0");
    }
}

Targets encode_targets(std::span<const double> angles_deg) {
    Targets t;
    t.sin.reserve(angles_deg.size());
    t.cos.reserve(angles_deg.size());
    for (double a : angles_deg) {
        if (!std::isfinite(a)) throw InvalidInput("encode_targets: non-finite angle");
        const double r = a * std::numbers::pi / 180.0;
        t.sin.push_back(std::sin(r));
        t.cos.push_back(std::cos(r));
    }
    return t;
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidInput("k must be >= 2");
    const auto kk = static_cast<std::size_t>(k);
    if (n < kk) {
        throw InvalidInput("cannot split " + std::to_string(n) + " rows into " +
                           std::to_string(k) + " folds");
    }
    const auto perm = seeded_permutation(n, seed);
    std::vector<std::vector<std::size_t>> folds(kk);
    std::size_t pos = 0;
    for (std::size_t f = 0; f < kk; ++f) {
        const std::size_t size = n / kk + (f < n % kk ? 1 : 0);
        folds[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                        perm.begin() + static_cast<std::ptrdiff_t>(pos + size));
        pos += size;
    }
    return folds;
}

Eigen::MatrixXd cv_scores(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& Y,
                          const CvConfig& cfg) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(gram.rows());
    if (static_cast<std::size_t>(Y.rows()) != n) throw InvalidInput("cv: targets not aligned to rows");
    const auto folds = make_folds(n, cfg.k, cfg.seed);

    Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cfg.alpha_grid.size()), Y.cols());
    for (std::size_t f = 0; f < folds.size(); ++f) {
        std::vector<std::size_t> fit_idx;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            if (g != f) fit_idx.insert(fit_idx.end(), folds[g].begin(), folds[g].end());
        }
        Eigen::MatrixXd Y_fit(static_cast<Eigen::Index>(fit_idx.size()), Y.cols());
        for (std::size_t i = 0; i < fit_idx.size(); ++i) Y_fit.row(static_cast<Eigen::Index>(i)) = Y.row(static_cast<Eigen::Index>(fit_idx[i]));

        for (std::size_t a = 0; a < cfg.alpha_grid.size(); ++a) {
            const GramRidge model(gram, fit_idx, Y_fit, cfg.alpha_grid[a]);
            const Eigen::MatrixXd pred = model.predict(folds[f]);
            for (std::size_t v = 0; v < folds[f].size(); ++v) {
                const auto diff = pred.row(static_cast<Eigen::Index>(v)) - Y.row(static_cast<Eigen::Index>(folds[f][v]));
                scores.row(static_cast<Eigen::Index>(a)) +=
                    diff.array().square().matrix() / static_cast<double>(folds[f].size());
            }
        }
    }
    return scores / static_cast<double>(folds.size());
}

double best_alpha(std::span<const double> grid, const Eigen::VectorXd& scores) {
    std::vector<std::size_t> order(grid.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return grid[a] < grid[b]; });
    std::size_t best = order.front();
    for (auto i : order) {
        if (scores(static_cast<Eigen::Index>(i)) <= scores(static_cast<Eigen::Index>(best))) best = i;
    }
    return grid[best];
}

double cv_select_alpha(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CvConfig& cfg) {
    cfg.validate();
    if (X.rows() < cfg.k) throw InvalidInput("fewer rows than folds");
    if (y.size() != X.rows()) throw InvalidInput("targets not aligned to rows");
    const Eigen::MatrixXd gram = X * X.transpose();
    const Eigen::MatrixXd scores = cv_scores(gram, y, cfg);
    return best_alpha(cfg.alpha_grid, scores.col(0));
}

CircularProbe fit_probe(const EmbeddingSet& normalized, std::span<const std::size_t> rows,
                        const NormStats& norm, const CvConfig& cfg) {
    cfg.validate();
    if (rows.size() < 2) throw InvalidInput("fit_probe needs at least 2 rows");
    if (rows.size() < static_cast<std::size_t>(cfg.k)) throw InvalidInput("fewer rows than folds");
    if (norm.mean.size() != normalized.d) throw InvalidInput("normalisation stats do not match d");

    std::set<double> distinct;
    std::vector<double> angles;
    for (auto r : rows) {
        if (r >= normalized.n) throw InvalidInput("row index out of range");
        angles.push_back(normalized.angles_deg[r]);
        distinct.insert(std::fmod(std::fmod(normalized.angles_deg[r], 360.0) + 360.0, 360.0));
    }
    if (distinct.size() < 2) throw DegenerateSample("training angles must span at least 2 values");

    const auto targets = encode_targets(angles);
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd Y(m, 2);
    for (Eigen::Index i = 0; i < m; ++i) {
        Y(i, 0) = targets.sin[static_cast<std::size_t>(i)];
        Y(i, 1) = targets.cos[static_cast<std::size_t>(i)];
    }

    const Eigen::MatrixXd gram = gram_matrix(normalized, rows);
    const Eigen::MatrixXd scores = cv_scores(gram, Y, cfg);

    CircularProbe probe;
    probe.alpha_sin = best_alpha(cfg.alpha_grid, scores.col(0));
    probe.alpha_cos = best_alpha(cfg.alpha_grid, scores.col(1));
    probe.norm = norm;

    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

    // Refit each head on every training row; w = sum_i a_i (x_i - xbar).
    auto refit = [&](Eigen::Index head, double alpha, std::vector<double>& w, double& b) {
        const GramRidge model(gram, all, Y.col(head), alpha);
        const Eigen::VectorXd a = model.coef().col(0);
        const double a_sum = a.sum();
        w.assign(normalized.d, 0.0);
        std::vector<double> x_mean(normalized.d, 0.0);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto x = normalized.row(rows[i]);
            const double ai = a(static_cast<Eigen::Index>(i));
            for (std::size_t j = 0; j < normalized.d; ++j) {
                w[j] += ai * x[j];
                x_mean[j] += x[j];
            }
        }
        double dot = 0.0;
        for (std::size_t j = 0; j < normalized.d; ++j) {
            x_mean[j] /= static_cast<double>(rows.size());
            w[j] -= a_sum * x_mean[j];
            dot += x_mean[j] * w[j];
        }
        b = model.y_mean()(0) - dot;
    };
    refit(0, probe.alpha_sin, probe.w_sin, probe.b_sin);
    refit(1, probe.alpha_cos, probe.w_cos, probe.b_cos);
    return probe;
}

std::pair<double, double> predict_raw(const CircularProbe& probe, std::span<const float> x) {
    if (x.size() != probe.dim()) {
        throw InvalidInput("probe expects " + std::to_string(probe.dim()) + " features, got " +
                           std::to_string(x.size()));
    }
    double s = probe.b_sin, c = probe.b_cos;
    for (std::size_t j = 0; j < x.size(); ++j) {
        s += probe.w_sin[j] * x[j];
        c += probe.w_cos[j] * x[j];
    }
    return {s, c};
}

double decode_angle(double s, double c) {
    if (s == 0.0 && c == 0.0) throw UndefinedAngle("sin and cos predictions are both zero");
    double deg = std::atan2(s, c) * 180.0 / std::numbers::pi;
    if (deg < 0.0) deg += 360.0;
    if (deg >= 360.0) deg -= 360.0;
    return deg;
}

double predict_angle(const CircularProbe& probe, std::span<const float> x) {
    const auto [s, c] = predict_raw(probe, x);
    return decode_angle(s, c);
}

ProbeReport evaluate(const CircularProbe& probe, const EmbeddingSet& normalized,
                     std::span<const std::size_t> rows) {
    if (rows.empty()) throw InvalidInput("evaluate: no test rows");
    ProbeReport r;
    double sum = 0.0;
    r.max_deg = 0.0;
    r.min_deg = std::numeric_limits<double>::infinity();
    for (auto i : rows) {
        if (i >= normalized.n) throw InvalidInput("row index out of range");
        const double pred = predict_angle(probe, normalized.row(i));
        const double res = circ_diff(pred, normalized.angles_deg[i]);
        r.predictions_deg.push_back(pred);
        r.residuals_deg.push_back(res);
        r.angles_deg.push_back(normalized.angles_deg[i]);
        r.paths.push_back(normalized.path_or_index(i));
        sum += std::abs(res);
        r.max_deg = std::max(r.max_deg, std::abs(res));
        r.min_deg = std::min(r.min_deg, std::abs(res));
    }
    r.mae_deg = sum / static_cast<double>(rows.size());
    return r;
}

void write_report_csv(const ProbeReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    out.precision(17);
    out << "path,angle_deg,predicted_deg,residual_deg\n";
    for (std::size_t i = 0; i < report.residuals_deg.size(); ++i) {
        out << report.paths[i] << ',' << report.angles_deg[i] << ',' << report.predictions_deg[i]
            << ',' << report.residuals_deg[i] << '\n';
    }
}

void write_probe(const CircularProbe& probe, const std::filesystem::path& path) {
    const std::size_t d = probe.dim();
    if (probe.w_cos.size() != d || probe.norm.mean.size() != d || probe.norm.std.size() != d) {
        throw InvalidInput("write_probe: inconsistent probe dimensions");
    }
    const nlohmann::json header = {
        {"magic", kProbeMagic},       {"d", d},
        {"b_sin", probe.b_sin},       {"b_cos", probe.b_cos},
        {"alpha_sin", probe.alpha_sin}, {"alpha_cos", probe.alpha_cos},
    };
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot open " + path.string() + " for writing");
    out << header.dump() << '\n';
    auto put = [&](const std::vector<double>& v) {
        std::vector<float> f(v.begin(), v.end());
        write_f32_le(out, f);
    };
    put(probe.w_sin);
    put(probe.w_cos);
    put(probe.norm.mean);
    put(probe.norm.std);
    if (!out) throw Error("write failed: " + path.string());
}

CircularProbe read_probe(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
    CircularProbe probe;
    std::size_t d = 0;
    try {
        const auto h = nlohmann::json::parse(line);
        if (!h.is_object() || h.value("magic", "") != kProbeMagic) {
            throw FormatError(path.string() + ": magic mismatch");
        }
        d = h.at("d").get<std::size_t>();
        probe.b_sin = h.at("b_sin").get<double>();
        probe.b_cos = h.at("b_cos").get<double>();
        probe.alpha_sin = h.at("alpha_sin").get<double>();
        probe.alpha_cos = h.at("alpha_cos").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": malformed header: " + e.what());
    }
    if (d == 0) throw FormatError(path.string() + ": d must be positive");
    auto get = [&](std::vector<double>& v) {
        std::vector<float> f(d);
        read_f32_le(in, f, path.string());
        v.assign(f.begin(), f.end());
    };
    get(probe.w_sin);
    get(probe.w_cos);
    get(probe.norm.mean);
    get(probe.norm.std);
    if (in.peek() != std::char_traits<char>::eof()) throw FormatError(path.string() + ": trailing bytes");
    probe.norm.zero_variance_mask.resize(d);
    for (std::size_t j = 0; j < d; ++j) probe.norm.zero_variance_mask[j] = probe.norm.std[j] == 0.0;
    return probe;
}

}  // namespace orprobe
