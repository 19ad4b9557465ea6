#pragma once

#include <vector>

#include "mgarch/params.hpp"
#include "mgarch/types.hpp"

namespace mgarch {

/// Smooth bijection between the constrained parameter space and unconstrained
/// optimizer coordinates. Decay rates, moduli and angles go through logistic
/// maps onto margin-shrunk intervals; the correlation weights through a
/// softmax onto the open simplex; the baseline correlation through
/// hyperspherical Cholesky angles (unit-diagonal PD by construction).
/// Intercepts, coefficient matrices and low-rank factors are untransformed.
///
/// The sign of each real decay rate is fixed per instance: the admissible set
/// (-1,0) U (0,1) is disconnected, so a run cannot cross zero.
struct TransformSpec {
    ModelOrder order;
    double eta = 1e-6;             ///< boundary margin
    std::vector<int> lambda_sign;  ///< +1 or -1 per real term
    bool lowrank = false;

    /// Dimension of the unconstrained coordinate vector.
    int dim() const { return lowrank ? order.dim_lowrank() : order.dim_general(); }
};

GeneralParams decode_general(const TransformSpec& spec, const VectorXd& x);
VectorXd encode_general(const TransformSpec& spec, const GeneralParams& p);

LowRankParams decode_lowrank(const TransformSpec& spec, const VectorXd& x);
VectorXd encode_lowrank(const TransformSpec& spec, const LowRankParams& p);

/// Pulls a gradient in natural (packed) coordinates back to the unconstrained
/// coordinates: grad_x = (d theta / d x)' * grad_theta.
VectorXd pullback_gradient(const TransformSpec& spec, const VectorXd& x, const VectorXd& grad_theta);

/// Column-stacked strict-lower-triangle flat index of the (i, j) entry, i > j.
int vechsec_index(int m, int i, int j);

}  // namespace mgarch
