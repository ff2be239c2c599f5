#include "orprobe/ridge.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orprobe/error.hpp"

namespace orprobe {

namespace {

void check_problem(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
    if (X.rows() < 2) throw InvalidInput("ridge_fit needs at least 2 rows");
    if (X.cols() < 1) throw InvalidInput("ridge_fit needs at least 1 feature");
    if (y.size() != X.rows()) throw InvalidInput("ridge_fit: target length does not match rows");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidInput("ridge_fit: alpha must be > 0");
}

template <typename Solver>
Eigen::MatrixXd solve_checked(const Solver& solver, const Eigen::MatrixXd& rhs) {
    if (solver.info() != Eigen::Success) throw InternalError("ridge system is singular");
    Eigen::MatrixXd out = solver.solve(rhs);
    if (!out.allFinite()) throw InternalError("ridge solve produced non-finite values");
    return out;
}

}  // namespace

RidgeSolution ridge_fit_primal(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
    check_problem(X, y, alpha);
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    Eigen::MatrixXd A = Xc.transpose() * Xc;
    A.diagonal().array() += alpha;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
    RidgeSolution sol;
    sol.w = solve_checked(ldlt, Xc.transpose() * yc);
    sol.b = y_mean - x_mean.dot(sol.w);
    return sol;
}

RidgeSolution ridge_fit_dual(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
    check_problem(X, y, alpha);
    const Eigen::RowVectorXd x_mean = X.colwise().mean();
    const double y_mean = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - x_mean;
    const Eigen::VectorXd yc = y.array() - y_mean;

    Eigen::MatrixXd K = Xc * Xc.transpose();
    K.diagonal().array() += alpha;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    const Eigen::VectorXd a = solve_checked(ldlt, yc);
    RidgeSolution sol;
    sol.w = Xc.transpose() * a;
    sol.b = y_mean - x_mean.dot(sol.w);
    return sol;
}

RidgeSolution ridge_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
    return X.cols() > X.rows() ? ridge_fit_dual(X, y, alpha) : ridge_fit_primal(X, y, alpha);
}

Eigen::MatrixXd gram_matrix(const EmbeddingSet& set, std::span<const std::size_t> rows) {
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);
    constexpr std::size_t kBlock = 2048;
    Eigen::MatrixXd chunk;
    for (std::size_t j0 = 0; j0 < set.d; j0 += kBlock) {
        const std::size_t width = std::min(kBlock, set.d - j0);
        chunk.resize(m, static_cast<Eigen::Index>(width));
        for (Eigen::Index i = 0; i < m; ++i) {
            const float* src = set.data.data() + rows[static_cast<std::size_t>(i)] * set.d + j0;
            for (std::size_t j = 0; j < width; ++j) chunk(i, static_cast<Eigen::Index>(j)) = src[j];
        }
        G.selfadjointView<Eigen::Lower>().rankUpdate(chunk);
    }
    G.triangularView<Eigen::StrictlyUpper>() = G.transpose();
    return G;
}

GramRidge::GramRidge(const Eigen::MatrixXd& gram, std::vector<std::size_t> fit_idx,
                     const Eigen::MatrixXd& Y, double alpha)
    : gram_(gram), fit_idx_(std::move(fit_idx)) {
    const auto m = static_cast<Eigen::Index>(fit_idx_.size());
    if (m < 1) throw InvalidInput("GramRidge: empty fit set");
    if (Y.rows() != m) throw InvalidInput("GramRidge: targets not aligned to fit rows");
    if (!(alpha > 0.0)) throw InvalidInput("GramRidge: alpha must be > 0");

    // Centring in feature space, expressed through the Gram matrix:
    //   <x_u - xbar, x_v - xbar> = G(u,v) - r(u) - r(v) + g
    row_mean_ = Eigen::VectorXd::Zero(gram_.rows());
    for (Eigen::Index u = 0; u < gram_.rows(); ++u) {
        double s = 0.0;
        for (auto j : fit_idx_) s += gram_(u, static_cast<Eigen::Index>(j));
        row_mean_(u) = s / static_cast<double>(m);
    }
    grand_mean_ = 0.0;
    for (auto j : fit_idx_) grand_mean_ += row_mean_(static_cast<Eigen::Index>(j));
    grand_mean_ /= static_cast<double>(m);

    Eigen::MatrixXd K(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const auto ia = static_cast<Eigen::Index>(fit_idx_[static_cast<std::size_t>(a)]);
        for (Eigen::Index b = 0; b <= a; ++b) {
            const auto ib = static_cast<Eigen::Index>(fit_idx_[static_cast<std::size_t>(b)]);
            K(a, b) = K(b, a) = gram_(ia, ib) - row_mean_(ia) - row_mean_(ib) + grand_mean_;
        }
    }
    K.diagonal().array() += alpha;

    y_mean_ = Y.colwise().mean();
    const Eigen::MatrixXd Yc = Y.rowwise() - y_mean_;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
    coef_ = solve_checked(ldlt, Yc);
}

Eigen::MatrixXd GramRidge::predict(std::span<const std::size_t> idx) const {
    const auto m = static_cast<Eigen::Index>(fit_idx_.size());
    Eigen::MatrixXd cross(static_cast<Eigen::Index>(idx.size()), m);
    for (Eigen::Index v = 0; v < cross.rows(); ++v) {
        const auto iv = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(v)]);
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto ia = static_cast<Eigen::Index>(fit_idx_[static_cast<std::size_t>(a)]);
            cross(v, a) = gram_(iv, ia) - row_mean_(iv) - row_mean_(ia) + grand_mean_;
        }
    }
    Eigen::MatrixXd pred = cross * coef_;
    pred.rowwise() += y_mean_;
    return pred;
}

}  // namespace orprobe
