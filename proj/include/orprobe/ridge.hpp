#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "orprobe/embedstore.hpp"

namespace orprobe {

struct RidgeSolution {
    Eigen::VectorXd w;
    double b = 0.0;
};

// Ridge regression with an unpenalised intercept:
//   minimise ||X w + b - y||^2 + alpha ||w||^2.
// Both routes work on column-centred data and agree to rounding.

/// (Xc^T Xc + alpha I)^-1 Xc^T yc
RidgeSolution ridge_fit_primal(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha);

/// Xc^T (Xc Xc^T + alpha I)^-1 yc
RidgeSolution ridge_fit_dual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha);

/// Dual route when d > n, primal otherwise. Requires n >= 2, alpha > 0.
RidgeSolution ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha);

/// Uncentred Gram matrix X_R X_R^T (double accumulation) over the listed
/// rows of a float32 set, built column block by column block so d can be
/// large.
Eigen::MatrixXd gram_matrix(const EmbeddingSet& set, std::span<const std::size_t> rows);

/// Dual ridge fitted on a subset of the rows behind a Gram matrix. All
/// indices are positions into that Gram matrix. Several targets (columns
/// of Y) share one factorisation.
class GramRidge {
public:
    GramRidge(const Eigen::MatrixXd& gram, std::vector<std::size_t> fit_idx,
              const Eigen::MatrixXd& Y, double alpha);

    /// Predictions for Gram positions `idx`, one row per index.
    Eigen::MatrixXd predict(std::span<const std::size_t> idx) const;

    /// Dual coefficients, one column per target, aligned to fit_idx().
    const Eigen::MatrixXd& coef() const { return coef_; }
    const Eigen::RowVectorXd& y_mean() const { return y_mean_; }
    const std::vector<std::size_t>& fit_idx() const { return fit_idx_; }

private:
    const Eigen::MatrixXd& gram_;
    std::vector<std::size_t> fit_idx_;
    Eigen::VectorXd row_mean_;  // mean_j G(u, j) over fit rows, for every u
    double grand_mean_ = 0.0;
    Eigen::MatrixXd coef_;
    Eigen::RowVectorXd y_mean_;
};

}  // namespace orprobe
