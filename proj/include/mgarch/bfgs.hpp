#pragma once

#include <functional>
#include <string>

#include "mgarch/types.hpp"

namespace mgarch {

/// Objective callback: returns f(x) and, when grad is non-null, fills the
/// gradient. May return +infinity to signal an inadmissible point; the line
/// search then backtracks.
using Objective = std::function<double(const VectorXd& x, VectorXd* grad)>;

struct BfgsOptions {
    int max_iter = 500;
    double grad_tol = 1e-6;   ///< infinity-norm gradient threshold
    double f_tol = 1e-11;     ///< relative objective stagnation threshold
    double c1 = 1e-4;         ///< sufficient-decrease constant
    double c2 = 0.9;          ///< curvature constant
    int ls_max_evals = 40;
};

struct BfgsResult {
    VectorXd x;
    double f = 0.0;
    VectorXd grad;
    int iterations = 0;
    int n_evals = 0;
    bool converged = false;     ///< gradient small or objective stagnated
    std::string stop_reason;
};

/// BFGS with a strong-Wolfe bracketing/zoom line search. Accepted iterations
/// decrease the objective monotonically.
BfgsResult minimize_bfgs(const Objective& objective, VectorXd x0, const BfgsOptions& opts);

}  // namespace mgarch
