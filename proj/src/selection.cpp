#include "mgarch/selection.hpp"

#include <cmath>
#include <cstdio>
#include <optional>

#include "mgarch/parallel.hpp"
#include "mgarch/rng.hpp"

namespace mgarch {

double bic(const FitReport& fit) {
    if (fit.n <= 0) throw ConstraintViolation("bic: fit carries no sample size");
    return 2.0 * fit.neg_loglik + fit.d_bar() * std::log(static_cast<double>(fit.n));
}

SelectionResult select_order(const MatrixXd& panel, int o_max, bool lowrank,
                             const FitOptions& opts, int k_window) {
    const int m = static_cast<int>(panel.cols());
    if (o_max < 1 || o_max > m)
        throw ConstraintViolation("select_order: o_max must satisfy 1 <= o_max <= m");

    std::vector<std::pair<int, int>> grid;
    for (int r = 0; r <= o_max; ++r)
        for (int s = 0; (r + 2 * s) <= o_max; ++s)
            if (r + 2 * s >= 1) grid.emplace_back(r, s);

    SelectionResult sel;
    sel.table.resize(grid.size());
    std::vector<std::optional<FitReport>> fits(grid.size());

    parallel_for(grid.size(), opts.threads, [&](std::size_t idx) {
        const auto [r, s] = grid[idx];
        OrderCell& cell = sel.table[idx];
        cell.r = r;
        cell.s = s;
        ModelOrder order(m, r, s, k_window);
        cell.d_bar = lowrank ? order.dim_lowrank() : order.dim_general();
        FitOptions cell_opts = opts;
        cell_opts.threads = 1;  // outer loop already parallel
        cell_opts.seed = stream_seed(opts.seed, idx + 1);
        try {
            FitReport fit =
                lowrank ? fit_lowrank(panel, order, cell_opts) : fit_general(panel, order, cell_opts);
            cell.nll = fit.neg_loglik;
            cell.bic_value = bic(fit);
            cell.converged = fit.converged;
            cell.valid = true;
            fits[idx] = std::move(fit);
        } catch (const Error&) {
            cell.valid = false;
        }
    });

    int best = -1;
    for (std::size_t i = 0; i < sel.table.size(); ++i) {
        const OrderCell& c = sel.table[i];
        if (!c.valid) continue;
        if (best < 0) {
            best = static_cast<int>(i);
            continue;
        }
        const OrderCell& b = sel.table[static_cast<std::size_t>(best)];
        const bool better =
            c.bic_value < b.bic_value ||
            (c.bic_value == b.bic_value &&
             (c.r + 2 * c.s < b.r + 2 * b.s ||
              (c.r + 2 * c.s == b.r + 2 * b.s && c.s < b.s)));
        if (better) best = static_cast<int>(i);
    }
    if (best < 0) throw NoConvergence("select_order: every cell failed to fit");
    sel.r_hat = sel.table[static_cast<std::size_t>(best)].r;
    sel.s_hat = sel.table[static_cast<std::size_t>(best)].s;
    sel.best_fit = *fits[static_cast<std::size_t>(best)];
    return sel;
}

std::string selection_to_csv(const SelectionResult& sel) {
    std::string out = "r,s,d_bar,neg_loglik,bic,converged\n";
    char buf[160];
    for (const OrderCell& c : sel.table) {
        if (c.valid)
            std::snprintf(buf, sizeof(buf), "%d,%d,%d,%.17g,%.17g,%d\n", c.r, c.s, c.d_bar, c.nll,
                          c.bic_value, c.converged ? 1 : 0);
        else
            std::snprintf(buf, sizeof(buf), "%d,%d,%d,,,0\n", c.r, c.s, c.d_bar);
        out += buf;
    }
    return out;
}

}  // namespace mgarch
