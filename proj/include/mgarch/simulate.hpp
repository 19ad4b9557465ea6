#pragma once

#include <cstdint>
#include <string>

#include "mgarch/params.hpp"
#include "mgarch/types.hpp"

namespace mgarch {

/// Innovation family: standard normal components, or independent Student-t
/// components scaled by sqrt((nu-2)/nu) so the covariance stays the identity.
struct InnovationSpec {
    enum class Kind { Gaussian, StudentT } kind = Kind::Gaussian;
    double nu = 5.0;

    /// Parses "normal", "t5", or "t(7.5)" style names.
    static InnovationSpec parse(const std::string& name);
    std::string name() const;
};

struct SimDiagnostics {
    double stationarity_min_sum = 0.0;
    bool stationarity_ok = false;
    long floored_logs = 0;        ///< how many generated values hit the log floor
    double max_abs_log_h = 0.0;
};

struct SimResult {
    MatrixXd panel;  ///< n x m simulated returns (burn-in discarded)
    MatrixXd eps;    ///< matching devolatilized residuals
    SimDiagnostics diag;
};

/// Generates a path of the model. Volatility states start at zero, the
/// correlation recursion at the baseline matrix, and the residual window at
/// the all-ones-history residuals; `burn` initial draws are discarded.
/// The conditional square root is the diagonal scale times the lower Cholesky
/// factor of the correlation matrix, so runs are reproducible bit for bit.
/// Throws OverflowError on explosive paths and ConstraintViolation when the
/// stationarity check fails (unless allow_nonstationary).
SimResult simulate_path(const GeneralParams& p, int n, int burn, const InnovationSpec& dist,
                        std::uint64_t seed, bool allow_nonstationary = false,
                        double log_floor = 1e-8);

/// Named parameter sets used across the simulation studies. DGP5's factor
/// vectors are drawn from its documented uniform ranges with the given seed.
GeneralParams dgp_catalog(const std::string& name, std::uint64_t dgp5_seed = 20240501);

}  // namespace mgarch
