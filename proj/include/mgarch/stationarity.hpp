#pragma once

#include "mgarch/params.hpp"
#include "mgarch/types.hpp"

namespace mgarch {

enum class MatrixNormKind { One, Inf, Two };

/// Value of the stationarity sum
///   sum_k ||G0_k|| / (1 - |lambda_k|) + sum_k (||G1_k|| + ||G2_k||) / (1 - gamma_k)
/// under the chosen induced norm.
double stationarity_sum(const GeneralParams& p, MatrixNormKind norm);

struct StationarityReport {
    double sum_one = 0.0;
    double sum_inf = 0.0;
    double sum_two = 0.0;
    double min_sum = 0.0;   ///< minimum over the three norms
    bool satisfied = false; ///< min_sum < 1 (the condition only needs one norm)
};

/// Evaluates the sufficient condition under all three induced norms. A value
/// >= 1 under every norm means "condition not verified", not non-stationarity.
StationarityReport check_stationarity(const GeneralParams& p);

}  // namespace mgarch
