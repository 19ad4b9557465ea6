#pragma once

#include <memory>
#include <vector>

#include "mgarch/likelihood.hpp"
#include "mgarch/params.hpp"
#include "mgarch/types.hpp"

namespace mgarch {

/// Streaming one-step-ahead forecaster: after consuming observations
/// 1..t-1, predict() yields the conditional variance pieces for time t.
class ModelFilter {
  public:
    ModelFilter(const GeneralParams& p, double log_floor = 1e-8);

    /// Conditional pieces for the next period (does not consume data).
    struct Prediction {
        VectorXd log_h;
        MatrixXd R;
        MatrixXd H;
    };
    Prediction predict() const;

    /// Consumes one observation row.
    void advance(const VectorXd& y);

    const GeneralParams& params() const { return params_; }

  private:
    GeneralParams params_;
    double log_floor_;
    // implementation state lives in these components
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

/// One-step-ahead conditional covariance after the whole history.
MatrixXd forecast_H(const GeneralParams& p, const MatrixXd& history, double log_floor = 1e-8);

/// Minimum-variance unit-sum weights (short selling allowed). Throws
/// SingularMatrix for non-PD input.
VectorXd mv_weights(const MatrixXd& H);

struct EcrPe {
    double ecr = 0.0;  ///< empirical coverage rate in percent
    double pe = 0.0;   ///< standardized absolute deviation from the level
};
EcrPe ecr_pe(const std::vector<int>& hits, double tau);

struct TestResult {
    double stat = 0.0;
    double p = 1.0;
    bool flagged = false;  ///< degenerate design handled via reduced regression
};

/// Likelihood-ratio test of correct conditional coverage: unconditional
/// coverage plus first-order Markov independence, chi-squared with 2 df.
TestResult cc_test(const std::vector<int>& hits, double tau);

/// Dynamic quantile regression test: hits (centered at tau) regressed on an
/// intercept, n_lags lagged hits and the contemporaneous forecast;
/// chi-squared with n_lags + 2 df.
TestResult dq_test(const std::vector<int>& hits, const std::vector<double>& var_series, double tau,
                   int n_lags = 4);

struct VarBacktestReport {
    double tau = 0.0;
    std::vector<double> var_series;        ///< negative-VaR forecasts
    std::vector<double> portfolio_series;  ///< realized portfolio returns
    std::vector<double> sigma_series;      ///< forecast portfolio volatilities
    std::vector<int> hits;
    std::vector<int> origins;              ///< 1-based time index per entry
    double ecr = 0.0, pe = 0.0;
    double cc_stat = 0.0, cc_p = 1.0;
    double dq_stat = 0.0, dq_p = 1.0;
    bool dq_flagged = false;
    int n_out = 0;
    int failed_origins = 0;
};

struct RollingOptions {
    int refit_every = 1;   ///< refit cadence in periods; weights follow it
    bool lowrank = false;
    FitOptions fit;
};

/// Fixed moving-window one-step-ahead VaR production for a minimum-variance
/// portfolio, with hits recorded strictly out of sample. Between refits the
/// last fitted model filters forward over incoming data while portfolio
/// weights and residual quantiles stay frozen.
std::vector<VarBacktestReport> rolling_var(const MatrixXd& panel, int n0, const ModelOrder& order,
                                           const std::vector<double>& levels,
                                           const RollingOptions& opts);

std::string backtest_to_json(const std::vector<VarBacktestReport>& reports);
std::string backtest_to_csv(const VarBacktestReport& report);

}  // namespace mgarch
