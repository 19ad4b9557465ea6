#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mgarch/params.hpp"
#include "mgarch/types.hpp"

namespace mgarch {

struct FitOptions {
    int n_starts = 5;            ///< multistart count
    int max_iter = 500;
    double grad_tol = 1e-6;      ///< on the transformed, per-observation-scaled gradient
    std::uint64_t seed = 0;
    double log_floor = 1e-8;     ///< |y| floor inside the log-square transform
    double eig_floor = 1e-6;     ///< eigenvalue floor for correlation repairs
    double penalty_weight = 1e3; ///< objective penalty per repair
    double margin = 1e-6;        ///< boundary margin of the search space
    int threads = 1;             ///< parallel starts

    void validate() const;
};

struct FitReport {
    GeneralParams params;
    std::optional<LowRankParams> lowrank;  ///< present for factor-space fits
    double neg_loglik = 0.0;
    bool converged = false;
    int n_evals = 0;
    double gradient_norm = 0.0;       ///< infinity norm, transformed coordinates
    double stationarity_margin = 0.0; ///< minimum-norm stationarity sum at the optimum
    int pd_repair_count = 0;
    int n = 0;                        ///< sample size used
    std::uint64_t seed = 0;
    int best_start = -1;
    std::string stop_reason;
    bool canonical = true;  ///< false if duplicate rates prevented canonical ordering

    bool is_lowrank() const { return lowrank.has_value(); }
    /// Parameter count relevant for information criteria.
    int d_bar() const {
        return is_lowrank() ? params.order.dim_lowrank() : params.order.dim_general();
    }
};

/// Negative Gaussian quasi-log-likelihood (constant dropped) of the panel
/// under the truncated filter with all-ones pre-sample history. Throws
/// NonFiniteError naming the first failing observation.
double neg_loglik(const GeneralParams& p, const MatrixXd& panel, double log_floor = 1e-8);

/// Analytic gradient of neg_loglik in packed natural coordinates.
VectorXd grad_neg_loglik(const GeneralParams& p, const MatrixXd& panel, double log_floor = 1e-8);

/// One forward pass with optional derivative tracking.
struct LikelihoodEval {
    double nll = 0.0;        ///< objective including repair penalties
    VectorXd grad;           ///< filled when gradients requested
    MatrixXd scores;         ///< n x d per-observation score rows, when requested
    int pd_repairs = 0;
    bool ok = false;
    Eigen::Index first_bad_t = -1;  ///< 1-based index of the first non-finite term
    std::string what;
};

enum EvalWant : unsigned {
    kEvalObjective = 0,
    kEvalGradient = 1u << 0,
    kEvalScores = 1u << 1,
};

/// Non-throwing evaluator used by optimizers and the covariance estimators.
LikelihoodEval eval_likelihood(const GeneralParams& p, const MatrixXd& panel, unsigned want,
                               double log_floor = 1e-8, double eig_floor = 1e-6,
                               double penalty_weight = 1e3);

/// Best-of-n-starts quasi-Newton minimization over the unrestricted space.
/// Throws NoConvergence only if every start fails to produce a finite value;
/// otherwise returns the best report (converged flag may be false).
FitReport fit_general(const MatrixXd& panel, const ModelOrder& order, const FitOptions& opts);

/// Same protocol over the factor space; the report carries both the factors
/// and the induced full parameter set.
FitReport fit_lowrank(const MatrixXd& panel, const ModelOrder& order, const FitOptions& opts);

/// Jacobian of the factor-to-full mapping, d x d*.
MatrixXd lowrank_jacobian(const LowRankParams& lr);

std::string fit_report_to_json(const FitReport& rep, const FitOptions& opts);
FitReport fit_report_from_json(const std::string& text);

}  // namespace mgarch
