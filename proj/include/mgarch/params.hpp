#pragma once

#include <array>
#include <utility>
#include <vector>

#include "mgarch/types.hpp"

namespace mgarch {

/// Model orders: m series, r real decay terms, s rotating (complex-pair)
/// terms, and the length of the residual-correlation window.
struct ModelOrder {
    int m = 0;
    int r = 0;
    int s = 0;
    int k_window = 0;

    ModelOrder() = default;
    /// k_window defaults to m, the smallest admissible window.
    ModelOrder(int m_, int r_, int s_, int k = -1)
        : m(m_), r(r_), s(s_), k_window(k < 0 ? m_ : k) {
        validate();
    }

    void validate() const;

    /// Number of free parameters of the unrestricted model.
    int dim_general() const { return m + (r + 2 * s) * (1 + m * m) + m * (m - 1) / 2 + 2; }
    /// Number of free parameters under the rank-restricted factorization.
    int dim_lowrank() const { return m + r + 2 * s + 2 * m * (r + 4 * s) + m * (m - 1) / 2 + 2; }
    /// Length of the volatility-block coordinate vector (intercepts, decay
    /// rates, angles, coefficient matrices).
    int dim_delta() const { return m + r + 2 * s + (r + 2 * s) * m * m; }
    int dim_delta_lowrank() const { return m + r + 2 * s + 2 * m * (r + 4 * s); }

    bool operator==(const ModelOrder&) const = default;
};

/// Full parameter set of the unrestricted model.
struct GeneralParams {
    ModelOrder order;
    VectorXd omega_bar;           ///< m log-variance intercepts
    VectorXd lambda;              ///< r real decay rates, each in (-1,0) U (0,1)
    VectorXd gamma;               ///< s moduli in (0,1)
    VectorXd phi;                 ///< s rotation angles in (0,pi)
    std::vector<MatrixXd> G0;     ///< r coefficient matrices (m x m)
    std::vector<MatrixXd> G1;     ///< s matrices for the cosine terms
    std::vector<MatrixXd> G2;     ///< s matrices for the sine terms
    double beta1 = 0.0;
    double beta2 = 0.0;
    MatrixXd Rbar;                ///< baseline correlation, unit diagonal, PD

    /// Checks every invariant; with margin > 0 the strict inequalities are
    /// tightened to keep the point at distance `margin` from the boundary.
    /// Throws ConstraintViolation naming the first violated constraint.
    void validate(double margin = 0.0) const;
};

/// Parameters under the rank restrictions: each G0 is an outer product of one
/// vector pair, each G1/G2 a sum of two outer products.
struct LowRankParams {
    ModelOrder order;
    VectorXd omega_bar;
    VectorXd lambda;
    VectorXd gamma;
    VectorXd phi;
    std::vector<std::array<VectorXd, 2>> g0;  ///< r pairs
    std::vector<std::array<VectorXd, 4>> g1;  ///< s quadruples
    std::vector<std::array<VectorXd, 4>> g2;  ///< s quadruples
    double beta1 = 0.0;
    double beta2 = 0.0;
    MatrixXd Rbar;

    void validate(double margin = 0.0) const;
};

/// Number of strictly-below-diagonal entries of an m x m matrix.
inline int vechsec_size(int m) { return m * (m - 1) / 2; }

/// Maps a below-diagonal flat index (column-stacked strict lower triangle) to
/// 0-based (row, col) with row > col.
std::pair<int, int> vechsec_coords(int m, int idx);

/// Flattens into the packing order: omega_bar, lambda, gamma, phi,
/// vec(G0_1..G0_r), vec(G1_1..), vec(G2_1..), beta1, beta2, and the
/// column-stacked strict lower triangle of Rbar.
VectorXd pack(const GeneralParams& p);

/// Inverse of pack; validates all invariants of the result.
GeneralParams unpack(const VectorXd& v, const ModelOrder& order);

/// Same as unpack but skips validation (for finite-difference probes that
/// nudge a valid point by an epsilon).
GeneralParams unpack_unchecked(const VectorXd& v, const ModelOrder& order);

/// Factor-space packing: omega_bar, lambda, gamma, phi, the stacked factor
/// vectors, beta1, beta2, lower triangle of Rbar.
VectorXd pack(const LowRankParams& p);
LowRankParams unpack_lowrank(const VectorXd& v, const ModelOrder& order);
LowRankParams unpack_lowrank_unchecked(const VectorXd& v, const ModelOrder& order);

/// Expands the factors into full coefficient matrices; all scalar fields are
/// copied through unchanged.
GeneralParams theta_of_vartheta(const LowRankParams& lr);

/// Deterministic representative under block permutations: real decay rates
/// sorted descending by signed value (G0 permuted in lockstep), rotating
/// triples sorted descending by modulus. Throws DuplicateEigenvalue when two
/// rates coincide within tol.
GeneralParams canonicalize(const GeneralParams& p, double tol = 1e-10);

/// Rescales each factor pair so the left factor has unit Euclidean norm and a
/// nonnegative first nonzero entry. Leaves the induced matrices unchanged.
LowRankParams normalize_factors(const LowRankParams& lr);

/// JSON round trip: a flat "theta" array mirroring the packing order plus an
/// order header {m, r, s, k_window}.
std::string params_to_json(const GeneralParams& p);
GeneralParams params_from_json(const std::string& text);
std::string params_to_json(const LowRankParams& p);
LowRankParams lowrank_from_json(const std::string& text);

}  // namespace mgarch
