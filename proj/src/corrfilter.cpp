#include "mgarch/corrfilter.hpp"

#include <cmath>

namespace mgarch {

MatrixXd sample_corr(const MatrixXd& window) {
    const Eigen::Index m = window.cols();
    MatrixXd gram = window.transpose() * window;
    VectorXd inv_scale(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double q = gram(i, i);
        if (!(q > 0.0))
            throw DegenerateColumn("sample_corr: column " + std::to_string(i + 1) +
                                   " has zero sum of squares");
        inv_scale[i] = 1.0 / std::sqrt(q);
    }
    // Fill one triangle and mirror so the result is symmetric bit for bit.
    MatrixXd psi(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        psi(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            psi(i, j) = gram(i, j) * inv_scale[i] * inv_scale[j];
            psi(j, i) = psi(i, j);
        }
    }
    return psi;
}

MatrixXd step_R(const MatrixXd& psi, double beta1, double beta2, const MatrixXd& Rbar,
                const MatrixXd& Rprev) {
    return (1.0 - beta1 - beta2) * Rbar + beta1 * psi + beta2 * Rprev;
}

std::pair<MatrixXd, bool> ensure_pd(const MatrixXd& R, double eig_floor) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(R);
    if (es.eigenvalues().minCoeff() >= eig_floor) return {R, false};
    VectorXd clipped = es.eigenvalues().cwiseMax(eig_floor);
    MatrixXd fixed = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    VectorXd d = fixed.diagonal().cwiseSqrt();
    for (Eigen::Index i = 0; i < fixed.rows(); ++i)
        for (Eigen::Index j = 0; j < fixed.cols(); ++j) fixed(i, j) /= d[i] * d[j];
    fixed = 0.5 * (fixed + fixed.transpose());
    for (Eigen::Index i = 0; i < fixed.rows(); ++i) fixed(i, i) = 1.0;
    return {fixed, true};
}

CorrState::CorrState(const ModelOrder& order) : order_(order) { order_.validate(); }

void CorrState::reset(const GeneralParams& p) {
    const VectorXd eps_pre = (-0.5 * p.omega_bar).array().exp();
    window_.assign(static_cast<std::size_t>(order_.k_window), eps_pre);
    head_ = 0;
    R_prev_ = p.Rbar;
}

MatrixXd CorrState::psi() const { return sample_corr(window_matrix()); }

void CorrState::push(const VectorXd& eps) {
    window_[head_] = eps;
    head_ = (head_ + 1) % window_.size();
}

MatrixXd CorrState::window_matrix() const {
    MatrixXd w(static_cast<Eigen::Index>(window_.size()), order_.m);
    for (std::size_t i = 0; i < window_.size(); ++i)
        w.row(static_cast<Eigen::Index>(i)) = window_[(head_ + i) % window_.size()].transpose();
    return w;
}

}  // namespace mgarch
