#include "mgarch/inference.hpp"

#include <cmath>

#include <json.hpp>

#include "mgarch/stats.hpp"

namespace mgarch {

MatrixXd estimate_sigma(const GeneralParams& theta_hat, const MatrixXd& panel, double log_floor) {
    LikelihoodEval ev = eval_likelihood(theta_hat, panel, kEvalScores, log_floor);
    if (!ev.ok) throw NonFiniteError("estimate_sigma: " + ev.what);
    const Eigen::Index n = panel.rows();
    MatrixXd sigma = (ev.scores.transpose() * ev.scores) / static_cast<double>(n);
    return 0.5 * (sigma + sigma.transpose());
}

MatrixXd estimate_sigma_star(const GeneralParams& theta_hat, const MatrixXd& panel,
                             double log_floor, double fd_step) {
    const ModelOrder order = theta_hat.order;
    const int d = order.dim_general();
    const Eigen::Index n = panel.rows();
    const VectorXd theta = pack(theta_hat);
    MatrixXd H(d, d);
    VectorXd probe = theta;
    for (int k = 0; k < d; ++k) {
        const double h = fd_step * std::max(1.0, std::abs(theta[k]));
        probe[k] = theta[k] + h;
        const VectorXd g_plus = grad_neg_loglik(unpack_unchecked(probe, order), panel, log_floor);
        probe[k] = theta[k] - h;
        const VectorXd g_minus = grad_neg_loglik(unpack_unchecked(probe, order), panel, log_floor);
        probe[k] = theta[k];
        H.col(k) = (g_plus - g_minus) / (2.0 * h * static_cast<double>(n));
    }
    return 0.5 * (H + H.transpose());
}

CovReport asymptotic_cov(const FitReport& fit, const MatrixXd& panel, double log_floor) {
    CovReport cov;
    cov.n = static_cast<int>(panel.rows());
    cov.sigma_hat = estimate_sigma(fit.params, panel, log_floor);
    cov.sigma_star_hat = estimate_sigma_star(fit.params, panel, log_floor);

    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov.sigma_star_hat);
    if (es.eigenvalues().cwiseAbs().minCoeff() < 1e-12)
        throw SingularInformation("asymptotic_cov: Hessian estimate is numerically singular");
    const MatrixXd star_inv =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    MatrixXd sigma_g = star_inv * cov.sigma_hat * star_inv;
    sigma_g = 0.5 * (sigma_g + sigma_g.transpose());

    if (!fit.is_lowrank()) {
        cov.mode = CovReport::Mode::General;
        cov.avar = sigma_g;
        return cov;
    }

    cov.mode = CovReport::Mode::LowRank;
    const MatrixXd delta = lowrank_jacobian(*fit.lowrank);
    const MatrixXd M = delta.transpose() * cov.sigma_star_hat * delta;
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cutoff = 1e-10 * svd.singularValues().maxCoeff();
    VectorXd inv_sv = svd.singularValues();
    for (Eigen::Index i = 0; i < inv_sv.size(); ++i)
        inv_sv[i] = inv_sv[i] > cutoff ? 1.0 / inv_sv[i] : 0.0;
    const MatrixXd M_pinv = svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose();
    const MatrixXd P = delta * M_pinv * delta.transpose() * cov.sigma_star_hat;
    MatrixXd avar = P * sigma_g * P.transpose();
    cov.avar = 0.5 * (avar + avar.transpose());
    return cov;
}

MatrixXd gaussian_avar(const CovReport& cov) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov.sigma_star_hat);
    if (es.eigenvalues().cwiseAbs().minCoeff() < 1e-12)
        throw SingularInformation("gaussian_avar: Hessian estimate is numerically singular");
    MatrixXd inv =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return 0.5 * (inv + inv.transpose());
}

VectorXd spillover_cvec(const ModelOrder& order, int i, int j) {
    if (i < 0 || j < 0 || i >= order.m || j >= order.m)
        throw IndexOutOfRange("spillover: index out of range");
    const int m = order.m;
    VectorXd c = VectorXd::Zero(order.dim_general());
    const int head = m + order.r + 2 * order.s;
    // one in every G0 block and every G1 block at the (i, j) position
    for (int k = 0; k < order.r; ++k) c[head + k * m * m + j * m + i] = 1.0;
    const int g1_head = head + order.r * m * m;
    for (int k = 0; k < order.s; ++k) c[g1_head + k * m * m + j * m + i] = 1.0;
    return c;
}

SpilloverResult spillover_test(const GeneralParams& theta_hat, const CovReport& cov, int i, int j) {
    if (i == j) throw IndexOutOfRange("spillover: need an off-diagonal pair");
    const VectorXd c = spillover_cvec(theta_hat.order, i, j);
    const VectorXd theta = pack(theta_hat);
    SpilloverResult res;
    res.estimate = c.dot(theta);
    const double var = c.dot(cov.avar * c);
    res.se = std::sqrt(std::max(var, 0.0) / static_cast<double>(cov.n));
    res.z = res.se > 0.0 ? res.estimate / res.se : 0.0;
    res.p = normal_two_sided_p(res.z);
    return res;
}

std::string cov_report_to_json(const CovReport& cov) {
    auto matrix_rows = [](const MatrixXd& a) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            rows.emplace_back(a.row(i).begin(), a.row(i).end());
        return rows;
    };
    nlohmann::json j;
    j["mode"] = cov.mode == CovReport::Mode::General ? "general" : "lowrank";
    j["n"] = cov.n;
    j["sigma"] = matrix_rows(cov.sigma_hat);
    j["sigma_star"] = matrix_rows(cov.sigma_star_hat);
    j["avar"] = matrix_rows(cov.avar);
    const VectorXd se = cov.standard_errors();
    j["se"] = std::vector<double>(se.data(), se.data() + se.size());
    return j.dump(2);
}

}  // namespace mgarch
