#pragma once

#include <vector>

#include "mgarch/likelihood.hpp"
#include "mgarch/types.hpp"

namespace mgarch {

/// 2 * negative log-likelihood + parameter count * ln(n), with the count
/// taken from the fit's mode (full or factor-restricted).
double bic(const FitReport& fit);

struct OrderCell {
    int r = 0;
    int s = 0;
    int d_bar = 0;
    double nll = 0.0;
    double bic_value = 0.0;
    bool converged = false;
    bool valid = false;  ///< false when the cell's fit failed entirely
};

struct SelectionResult {
    int r_hat = -1;
    int s_hat = -1;
    std::vector<OrderCell> table;
    FitReport best_fit;
};

/// Fits every order with 1 <= r + 2s <= o_max and returns the BIC argmin.
/// Cells fit in parallel with per-cell seeds derived from opts.seed. Ties
/// break toward smaller r + 2s, then smaller s.
SelectionResult select_order(const MatrixXd& panel, int o_max, bool lowrank,
                             const FitOptions& opts, int k_window = -1);

std::string selection_to_csv(const SelectionResult& sel);

}  // namespace mgarch
