#include "mgarch/riskcast.hpp"

#include <cmath>
#include <cstdio>
#include <memory>

#include <json.hpp>

#include "mgarch/corrfilter.hpp"
#include "mgarch/stats.hpp"
#include "mgarch/volfilter.hpp"

namespace mgarch {

struct ModelFilter::Impl {
    VolState vol;
    CorrState corr;
    Impl(const GeneralParams& p) : vol(p.order), corr(p.order) { corr.reset(p); }
};

ModelFilter::ModelFilter(const GeneralParams& p, double log_floor)
    : params_(p), log_floor_(log_floor), impl_(std::make_shared<Impl>(p)) {
    params_.validate();
}

ModelFilter::Prediction ModelFilter::predict() const {
    Prediction pred;
    pred.log_h = impl_->vol.log_h(params_);
    if (!pred.log_h.allFinite() || pred.log_h.cwiseAbs().maxCoeff() > 700.0)
        throw OverflowError("forecast: log variance overflow");
    MatrixXd R = step_R(impl_->corr.psi(), params_.beta1, params_.beta2, params_.Rbar,
                        impl_->corr.R_prev());
    auto repaired = ensure_pd(R, 1e-12);
    pred.R = repaired.first;
    const VectorXd d = (0.5 * pred.log_h).array().exp();
    pred.H = d.asDiagonal() * pred.R * d.asDiagonal();
    pred.H = 0.5 * (pred.H + pred.H.transpose());
    return pred;
}

void ModelFilter::advance(const VectorXd& y) {
    if (y.size() != params_.order.m) throw DimensionMismatch("forecast: observation length");
    const VectorXd lnh = impl_->vol.log_h(params_);
    if (!lnh.allFinite() || lnh.cwiseAbs().maxCoeff() > 700.0)
        throw OverflowError("forecast: log variance overflow");
    MatrixXd R = step_R(impl_->corr.psi(), params_.beta1, params_.beta2, params_.Rbar,
                        impl_->corr.R_prev());
    const VectorXd eps = y.cwiseQuotient((0.5 * lnh).array().exp().matrix());
    impl_->corr.push(eps);
    impl_->corr.set_R_prev(R);
    const double floor_sq = log_floor_ * log_floor_;
    VectorXd x(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i)
        x[i] = std::log(std::max(y[i] * y[i], floor_sq));
    impl_->vol.advance(params_, x);
}

MatrixXd forecast_H(const GeneralParams& p, const MatrixXd& history, double log_floor) {
    if (history.cols() != p.order.m) throw DimensionMismatch("forecast_H: history shape");
    if (history.rows() < p.order.k_window)
        throw DimensionMismatch("forecast_H: history shorter than the correlation window");
    ModelFilter filter(p, log_floor);
    for (Eigen::Index t = 0; t < history.rows(); ++t)
        filter.advance(history.row(t).transpose());
    return filter.predict().H;
}

VectorXd mv_weights(const MatrixXd& H) {
    if (H.rows() != H.cols()) throw DimensionMismatch("mv_weights: square matrix required");
    Eigen::LLT<MatrixXd> llt(0.5 * (H + H.transpose()));
    if (llt.info() != Eigen::Success)
        throw SingularMatrix("mv_weights: covariance is not positive definite");
    const VectorXd ones = VectorXd::Ones(H.rows());
    VectorXd sol = llt.solve(ones);
    const double denom = ones.dot(sol);
    if (!(std::abs(denom) > 0.0)) throw SingularMatrix("mv_weights: degenerate normalization");
    return sol / denom;
}

EcrPe ecr_pe(const std::vector<int>& hits, double tau) {
    if (hits.empty()) throw DimensionMismatch("ecr_pe: empty hit series");
    double h = 0.0;
    for (int v : hits) h += v;
    const double freq = h / static_cast<double>(hits.size());
    EcrPe out;
    out.ecr = 100.0 * freq;
    out.pe = std::abs(freq - tau) / std::sqrt(tau * (1.0 - tau) / static_cast<double>(hits.size()));
    return out;
}

TestResult cc_test(const std::vector<int>& hits, double tau) {
    const auto n = static_cast<double>(hits.size());
    if (hits.size() < 10) throw DimensionMismatch("cc_test: need at least 10 observations");
    double n1 = 0.0;
    for (int v : hits) n1 += v;
    const double n0 = n - n1;
    auto xlogy = [](double x, double y) { return x > 0.0 ? x * std::log(y) : 0.0; };
    const double pi_hat = n1 / n;
    const double ll_null = xlogy(n1, tau) + xlogy(n0, 1.0 - tau);
    const double ll_alt = xlogy(n1, pi_hat) + xlogy(n0, 1.0 - pi_hat);
    const double lr_uc = -2.0 * (ll_null - ll_alt);

    // first-order Markov transition counts
    double t00 = 0, t01 = 0, t10 = 0, t11 = 0;
    for (std::size_t t = 1; t < hits.size(); ++t) {
        if (hits[t - 1] == 0)
            (hits[t] == 0 ? t00 : t01) += 1.0;
        else
            (hits[t] == 0 ? t10 : t11) += 1.0;
    }
    double lr_ind = 0.0;
    if (n1 > 0.0) {
        const double from0 = t00 + t01, from1 = t10 + t11;
        const double p01 = from0 > 0.0 ? t01 / from0 : 0.0;
        const double p11 = from1 > 0.0 ? t11 / from1 : 0.0;
        const double p = (t01 + t11) / (n - 1.0);
        const double ll_markov = xlogy(t01, p01) + xlogy(t00, 1.0 - p01) + xlogy(t11, p11) +
                                 xlogy(t10, 1.0 - p11);
        const double ll_iid = xlogy(t01 + t11, p) + xlogy(t00 + t10, 1.0 - p);
        lr_ind = -2.0 * (ll_iid - ll_markov);
    }
    TestResult res;
    res.stat = lr_uc + lr_ind;
    res.p = chi2_sf(res.stat, 2);
    return res;
}

TestResult dq_test(const std::vector<int>& hits, const std::vector<double>& var_series, double tau,
                   int n_lags) {
    if (hits.size() != var_series.size())
        throw DimensionMismatch("dq_test: hit and forecast series lengths differ");
    const int n = static_cast<int>(hits.size());
    if (n <= n_lags + 7) throw DimensionMismatch("dq_test: series too short");
    const int rows = n - n_lags;
    const int cols = n_lags + 2;
    MatrixXd X(rows, cols);
    VectorXd y(rows);
    for (int t = n_lags; t < n; ++t) {
        const int rix = t - n_lags;
        X(rix, 0) = 1.0;
        for (int l = 1; l <= n_lags; ++l) X(rix, l) = hits[static_cast<std::size_t>(t - l)];
        X(rix, cols - 1) = var_series[static_cast<std::size_t>(t)];
        y[rix] = hits[static_cast<std::size_t>(t)] - tau;
    }

    // Greedy column selection in the given order drops regressors that are
    // numerically collinear with earlier ones; the fitted projection (and so
    // the statistic) is the same as a pseudo-inverse solve.
    std::vector<int> kept;
    MatrixXd Q(rows, cols);
    TestResult res;
    for (int c = 0; c < cols; ++c) {
        VectorXd v = X.col(c);
        const double base = v.norm();
        for (std::size_t kix = 0; kix < kept.size(); ++kix)
            v -= Q.col(static_cast<Eigen::Index>(kix)).dot(X.col(c)) * Q.col(static_cast<Eigen::Index>(kix));
        if (v.norm() <= 1e-10 * std::max(base, 1.0)) {
            res.flagged = true;
            continue;
        }
        Q.col(static_cast<Eigen::Index>(kept.size())) = v / v.norm();
        kept.push_back(c);
    }
    MatrixXd Xk(rows, static_cast<Eigen::Index>(kept.size()));
    for (std::size_t kix = 0; kix < kept.size(); ++kix)
        Xk.col(static_cast<Eigen::Index>(kix)) = X.col(kept[kix]);
    const VectorXd beta = (Xk.transpose() * Xk).ldlt().solve(Xk.transpose() * y);
    const VectorXd fitted = Xk * beta;
    res.stat = fitted.squaredNorm() / (tau * (1.0 - tau));
    res.p = chi2_sf(res.stat, n_lags + 2);
    return res;
}

std::vector<VarBacktestReport> rolling_var(const MatrixXd& panel, int n0, const ModelOrder& order,
                                           const std::vector<double>& levels,
                                           const RollingOptions& opts) {
    const Eigen::Index n = panel.rows();
    if (n0 < order.k_window + 10 || n0 >= n)
        throw DimensionMismatch("rolling_var: window must satisfy k+10 <= n0 < n");
    if (opts.refit_every < 1) throw ConstraintViolation("rolling_var: refit_every must be >= 1");
    for (double tau : levels)
        if (!(tau > 0.0 && tau < 1.0))
            throw ConstraintViolation("rolling_var: quantile levels must lie in (0, 1)");

    std::vector<VarBacktestReport> reports(levels.size());
    for (std::size_t li = 0; li < levels.size(); ++li) reports[li].tau = levels[li];
    int failed = 0;

    std::unique_ptr<ModelFilter> filter;
    VectorXd weights;
    std::vector<double> quantiles(levels.size());

    // Origins are 0-based row indices of the first out-of-sample day.
    for (Eigen::Index origin = n0; origin < n; ++origin) {
        const bool refit_now = ((origin - n0) % opts.refit_every) == 0;
        if (refit_now) {
            const MatrixXd window = panel.middleRows(origin - n0, n0);
            bool ok = true;
            try {
                FitReport fit = opts.lowrank ? fit_lowrank(window, order, opts.fit)
                                             : fit_general(window, order, opts.fit);
                // Filter the fit window to collect in-sample residuals, then
                // keep the filter positioned at the forecast origin.
                auto fresh = std::make_unique<ModelFilter>(fit.params, opts.fit.log_floor);
                std::vector<double> resid;
                resid.reserve(static_cast<std::size_t>(n0));
                for (Eigen::Index t = 0; t < n0; ++t) {
                    const auto pred = fresh->predict();
                    const VectorXd w = mv_weights(pred.H);
                    const double sigma = std::sqrt(w.dot(pred.H * w));
                    const double z = w.dot(window.row(t).transpose());
                    resid.push_back(z / sigma);
                    fresh->advance(window.row(t).transpose());
                }
                for (std::size_t li = 0; li < levels.size(); ++li)
                    quantiles[li] = quantile_type7(resid, levels[li]);
                weights = mv_weights(fresh->predict().H);
                filter = std::move(fresh);
            } catch (const Error&) {
                ok = false;
                filter.reset();
            }
            if (!ok) {
                // Skip this block's origins; count one failure per block.
                ++failed;
            }
        }
        // Without a usable model, origins are excluded until the next refit.
        if (!filter) continue;
        const auto pred = filter->predict();
        const double sigma = std::sqrt(weights.dot(pred.H * weights));
        const double z = weights.dot(panel.row(origin).transpose());
        for (std::size_t li = 0; li < levels.size(); ++li) {
            VarBacktestReport& rep = reports[li];
            const double q = sigma * quantiles[li];
            rep.var_series.push_back(q);
            rep.sigma_series.push_back(sigma);
            rep.portfolio_series.push_back(z);
            rep.hits.push_back(z < q ? 1 : 0);
            rep.origins.push_back(static_cast<int>(origin) + 1);
        }
        filter->advance(panel.row(origin).transpose());
    }

    for (auto& rep : reports) {
        rep.n_out = static_cast<int>(rep.hits.size());
        rep.failed_origins = failed;
        if (rep.n_out == 0) continue;
        const EcrPe e = ecr_pe(rep.hits, rep.tau);
        rep.ecr = e.ecr;
        rep.pe = e.pe;
        if (rep.n_out >= 10) {
            const TestResult cc = cc_test(rep.hits, rep.tau);
            rep.cc_stat = cc.stat;
            rep.cc_p = cc.p;
        }
        if (rep.n_out > 4 + 7) {
            const TestResult dq = dq_test(rep.hits, rep.var_series, rep.tau);
            rep.dq_stat = dq.stat;
            rep.dq_p = dq.p;
            rep.dq_flagged = dq.flagged;
        }
    }
    return reports;
}

std::string backtest_to_json(const std::vector<VarBacktestReport>& reports) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& rep : reports) {
        j.push_back({{"tau", rep.tau},
                     {"n_out", rep.n_out},
                     {"failed_origins", rep.failed_origins},
                     {"ecr", rep.ecr},
                     {"pe", rep.pe},
                     {"cc_stat", rep.cc_stat},
                     {"cc_p", rep.cc_p},
                     {"dq_stat", rep.dq_stat},
                     {"dq_p", rep.dq_p},
                     {"dq_flagged", rep.dq_flagged}});
    }
    return j.dump(2);
}

std::string backtest_to_csv(const VarBacktestReport& rep) {
    std::string out = "t,portfolio,sigma,var,hit\n";
    char buf[200];
    for (std::size_t i = 0; i < rep.hits.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%d\n", rep.origins[i],
                      rep.portfolio_series[i], rep.sigma_series[i], rep.var_series[i], rep.hits[i]);
        out += buf;
    }
    return out;
}

}  // namespace mgarch
