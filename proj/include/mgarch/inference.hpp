#pragma once

#include "mgarch/likelihood.hpp"
#include "mgarch/params.hpp"
#include "mgarch/types.hpp"

namespace mgarch {

struct CovReport {
    enum class Mode { General, LowRank };
    Mode mode = Mode::General;
    MatrixXd sigma_hat;       ///< average score outer product
    MatrixXd sigma_star_hat;  ///< average per-observation Hessian, symmetrized
    MatrixXd avar;            ///< asymptotic covariance; s.e. = sqrt(diag / n)
    int n = 0;

    VectorXd standard_errors() const {
        return (avar.diagonal() / static_cast<double>(n)).cwiseMax(0.0).cwiseSqrt();
    }
};

/// Average outer product of the analytic per-observation scores at the fit.
MatrixXd estimate_sigma(const GeneralParams& theta_hat, const MatrixXd& panel,
                        double log_floor = 1e-8);

/// Average per-observation Hessian via central differences of the analytic
/// gradient, then symmetrized.
MatrixXd estimate_sigma_star(const GeneralParams& theta_hat, const MatrixXd& panel,
                             double log_floor = 1e-8, double fd_step = 1e-5);

/// Sandwich covariance of the fitted parameters. General mode inverts the
/// Hessian estimate around the score outer product; the factor-restricted
/// mode projects it with the analytic factor-map Jacobian and a
/// pseudo-inverse (singular values below 1e-10 of the largest are dropped).
/// Throws SingularInformation if the Hessian estimate is numerically singular.
CovReport asymptotic_cov(const FitReport& fit, const MatrixXd& panel, double log_floor = 1e-8);

/// Under Gaussian innovations the covariance simplifies to the inverse
/// Hessian; exposed behind this helper for that reduced report.
MatrixXd gaussian_avar(const CovReport& cov);

/// Selector vector c with Phi_1[i][j] = c' theta (0-based indices).
VectorXd spillover_cvec(const ModelOrder& order, int i, int j);

struct SpilloverResult {
    double estimate = 0.0;
    double se = 0.0;
    double z = 0.0;
    double p = 1.0;
};

/// Two-sided z test of the (i, j) volatility spillover coefficient, i != j
/// (0-based). Throws IndexOutOfRange for bad indices.
SpilloverResult spillover_test(const GeneralParams& theta_hat, const CovReport& cov, int i, int j);

std::string cov_report_to_json(const CovReport& cov);

}  // namespace mgarch
