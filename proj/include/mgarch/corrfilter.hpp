#pragma once

#include <utility>
#include <vector>

#include "mgarch/params.hpp"
#include "mgarch/types.hpp"

namespace mgarch {

/// Uncentered sample correlation of a window of residual vectors (rows =
/// observations). Throws DegenerateColumn if some column has zero sum of
/// squares.
MatrixXd sample_corr(const MatrixXd& window);

/// One step of the correlation recursion:
/// R_t = (1 - beta1 - beta2) Rbar + beta1 Psi + beta2 Rprev.
MatrixXd step_R(const MatrixXd& psi, double beta1, double beta2, const MatrixXd& Rbar,
                const MatrixXd& Rprev);

/// Clips eigenvalues at eig_floor and rescales to unit diagonal when the
/// smallest eigenvalue falls below the floor; otherwise returns the input
/// unchanged. The flag reports whether a repair happened.
std::pair<MatrixXd, bool> ensure_pd(const MatrixXd& R, double eig_floor);

/// Ring buffer of the last k residual vectors plus the previous correlation
/// matrix. The pre-sample window is filled with the residuals implied by an
/// all-ones history: exp(-omega_bar / 2) componentwise.
class CorrState {
  public:
    explicit CorrState(const ModelOrder& order);

    void reset(const GeneralParams& p);

    /// Sample correlation of the current window.
    MatrixXd psi() const;

    void push(const VectorXd& eps);

    const MatrixXd& R_prev() const { return R_prev_; }
    void set_R_prev(MatrixXd R) { R_prev_ = std::move(R); }

    /// Window rows ordered oldest-first (size k_window x m).
    MatrixXd window_matrix() const;

  private:
    ModelOrder order_;
    std::vector<VectorXd> window_;  // circular, oldest at head_
    std::size_t head_ = 0;
    MatrixXd R_prev_;
};

}  // namespace mgarch
