#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "orprobe/embedstore.hpp"

namespace orprobe {

/// Two independent ridge heads regressing sin(angle) and cos(angle).
struct CircularProbe {
    std::vector<double> w_sin;
    double b_sin = 0.0;
    std::vector<double> w_cos;
    double b_cos = 0.0;
    double alpha_sin = 0.0;
    double alpha_cos = 0.0;
    NormStats norm;

    std::size_t dim() const { return w_sin.size(); }
};

struct CvConfig {
    std::vector<double> alpha_grid = default_alpha_grid();
    int k = 5;
    std::uint64_t seed = 0;

    static std::vector<double> default_alpha_grid() {
        return {1e-4, 5e-4, 1e-3, 5e-3, 1e-2, 5e-2, 1e-1, 1.0, 10.0};
    }
    /// Throws InvalidInput for k < 2 or a grid that is empty or non-positive.
    void validate() const;
};

struct ProbeReport {
    double mae_deg = 0.0;
    double max_deg = 0.0;
    double min_deg = 0.0;
    std::vector<double> residuals_deg;    // circ_diff(pred, truth)
    std::vector<double> predictions_deg;
    std::vector<double> angles_deg;
    std::vector<std::string> paths;
};

struct Targets {
    std::vector<double> sin;
    std::vector<double> cos;
};

Targets encode_targets(std::span<const double> angles_deg);

/// K contiguous folds over a seeded shuffle of 0..n-1; the first n % k
/// folds hold one extra row.
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, std::uint64_t seed);

/// Mean (over folds) validation MSE for each grid alpha and each column of
/// Y, using a precomputed Gram matrix of the rows. Result is grid x targets.
Eigen::MatrixXd cv_scores(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& Y,
                          const CvConfig& cfg);

/// Grid alpha with the lowest score; exact ties go to the larger alpha.
double best_alpha(std::span<const double> grid, const Eigen::VectorXd& scores);

double cv_select_alpha(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CvConfig& cfg);

/// Fits both heads on `rows` of an already-normalised set: alpha chosen by
/// CV per head, then a refit on every listed row. `norm` is stored in the
/// probe for later use on raw vectors.
CircularProbe fit_probe(const EmbeddingSet& normalized, std::span<const std::size_t> rows,
                        const NormStats& norm, const CvConfig& cfg);

/// (s_hat, c_hat) for an already-normalised vector.
std::pair<double, double> predict_raw(const CircularProbe& probe, std::span<const float> x);

/// atan2 decoding to [0, 360). Throws UndefinedAngle for (0, 0).
double decode_angle(double s, double c);

double predict_angle(const CircularProbe& probe, std::span<const float> x);

/// Circular residuals and Table-style metrics on `rows` of a normalised set.
ProbeReport evaluate(const CircularProbe& probe, const EmbeddingSet& normalized,
                     std::span<const std::size_t> rows);

/// Columns: path, angle_deg, predicted_deg, residual_deg.
void write_report_csv(const ProbeReport& report, const std::filesystem::path& path);

inline constexpr const char* kProbeMagic = "ORPR1";

// .orpr: JSON header line + float32 w_sin, w_cos, mean, std (d each).
void write_probe(const CircularProbe& probe, const std::filesystem::path& path);
CircularProbe read_probe(const std::filesystem::path& path);

}  // namespace orprobe
