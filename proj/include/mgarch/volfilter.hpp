#pragma once

#include <vector>

#include "mgarch/params.hpp"
#include "mgarch/types.hpp"

namespace mgarch {

/// Lag-i coefficient matrix of the ARCH(infinity) representation:
/// sum_k lambda_k^{i-1} G0_k
/// + sum_k gamma_k^{i-1} [cos((i-1) phi_k) G1_k + sin((i-1) phi_k) G2_k].
MatrixXd phi_matrix(const GeneralParams& p, int i);

/// Elementwise ln(max(y^2, floor^2)); counts how many entries were floored.
/// Throws NonFiniteError on NaN or infinite input.
MatrixXd log_sq_returns(const MatrixXd& panel, double floor_abs, long* floored_count = nullptr);

struct VolPath {
    MatrixXd log_h;  ///< n x m rows of log conditional variances
    MatrixXd eps;    ///< n x m devolatilized residuals y_t / exp(log_h/2)
};

/// Per-eigenvalue accumulators realizing the infinite lag sums in O(1) per
/// step. Starting from the zero state corresponds to an all-ones pre-sample
/// history (log squares identically zero).
class VolState {
  public:
    explicit VolState(const ModelOrder& order);

    void reset();

    /// Current log variances given the coefficients (state reflects data
    /// consumed so far; the value is one-step-ahead measurable).
    VectorXd log_h(const GeneralParams& p) const;

    /// Consumes one row of log squared observations.
    void advance(const GeneralParams& p, const VectorXd& log_sq_row);

    const VectorXd& s(int k) const { return s_[static_cast<std::size_t>(k)]; }
    const VectorXd& a(int k) const { return a_[static_cast<std::size_t>(k)]; }
    const VectorXd& b(int k) const { return b_[static_cast<std::size_t>(k)]; }

  private:
    ModelOrder order_;
    std::vector<VectorXd> s_;  // r real-term accumulators
    std::vector<VectorXd> a_;  // s cosine accumulators
    std::vector<VectorXd> b_;  // s sine accumulators
};

/// Runs the filter over a whole panel. Throws OverflowError if any log
/// variance exceeds 700 in magnitude.
VolPath run_filter(const GeneralParams& p, const MatrixXd& log_sq, const MatrixXd& panel);

/// Identifies which block of the volatility coordinate vector a flat index
/// belongs to (ordering: intercepts, lambda, gamma, phi, vec(G0...), vec(G1...),
/// vec(G2...)).
struct DeltaCoord {
    enum class Kind { Omega, Lambda, Gamma, Phi, G0, G1, G2 };
    Kind kind;
    int block = 0;  ///< eigen-term index within its kind
    int row = 0;    ///< for matrix coordinates: 0-based row
    int col = 0;    ///< for matrix coordinates: 0-based column
};
DeltaCoord delta_coord(const ModelOrder& order, int idx);

/// VolState extended with the weighted accumulators needed for first and
/// second derivatives of log h with respect to the volatility coordinates.
/// Every derivative sum has its own exact recursion obtained by
/// differentiating the state update.
class VolDerivState {
  public:
    explicit VolDerivState(const ModelOrder& order);

    void reset();
    void advance(const GeneralParams& p, const VectorXd& log_sq_row);

    VectorXd log_h(const GeneralParams& p) const;

    /// Fills U with the first derivatives: U(l, i) = d log h_i / d delta_l.
    /// U must be dim_delta x m.
    void fill_dlogh(const GeneralParams& p, MatrixXd& U) const;

    /// Second derivative vector d^2 log h / (d delta_i d delta_j). Most pairs
    /// are structurally zero; only same-block pairs listed by the analytic
    /// chain are nonzero.
    VectorXd d2_logh(const GeneralParams& p, int di, int dj) const;

    // level accumulators
    const VectorXd& s(int k) const { return s_[static_cast<std::size_t>(k)]; }
    const VectorXd& a(int k) const { return a_[static_cast<std::size_t>(k)]; }
    const VectorXd& b(int k) const { return b_[static_cast<std::size_t>(k)]; }
    // first/second derivative accumulators w.r.t. the decay parameters
    const VectorXd& s_d(int k) const { return sd_[static_cast<std::size_t>(k)]; }
    const VectorXd& s_dd(int k) const { return sdd_[static_cast<std::size_t>(k)]; }
    const VectorXd& a_g(int k) const { return ag_[static_cast<std::size_t>(k)]; }
    const VectorXd& b_g(int k) const { return bg_[static_cast<std::size_t>(k)]; }
    const VectorXd& a_gg(int k) const { return agg_[static_cast<std::size_t>(k)]; }
    const VectorXd& b_gg(int k) const { return bgg_[static_cast<std::size_t>(k)]; }

  private:
    ModelOrder order_;
    std::vector<VectorXd> s_, sd_, sdd_;
    std::vector<VectorXd> a_, b_, ag_, bg_, agg_, bgg_;
};

}  // namespace mgarch
