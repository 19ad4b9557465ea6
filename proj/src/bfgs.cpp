#include "mgarch/bfgs.hpp"

#include <cmath>
#include <limits>

namespace mgarch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct LinePoint {
    double alpha = 0.0;
    double f = 0.0;
    double slope = 0.0;  // directional derivative
};

struct LineSearchState {
    const Objective& objective;
    const VectorXd& x0;
    const VectorXd& dir;
    int n_evals = 0;
    VectorXd x_buf, g_buf;

    LinePoint eval(double alpha) {
        x_buf = x0 + alpha * dir;
        const double f = objective(x_buf, &g_buf);
        ++n_evals;
        LinePoint p;
        p.alpha = alpha;
        p.f = f;
        p.slope = std::isfinite(f) ? g_buf.dot(dir) : kInf;
        return p;
    }
};

// Strong-Wolfe line search (bracket + zoom with bisection/interpolation).
// Returns alpha > 0 on success, 0 on failure; out holds the accepted point.
double wolfe_search(LineSearchState& ls, const LinePoint& start, double f0, double slope0,
                    const BfgsOptions& opts, LinePoint& out) {
    const double c1 = opts.c1, c2 = opts.c2;
    auto zoom = [&](LinePoint lo, LinePoint hi) -> double {
        for (int i = 0; i < opts.ls_max_evals; ++i) {
            // Quadratic interpolation using lo's slope, fall back to bisection.
            double alpha = 0.5 * (lo.alpha + hi.alpha);
            if (std::isfinite(hi.f) && std::isfinite(lo.f)) {
                const double d = hi.alpha - lo.alpha;
                const double denom = 2.0 * (hi.f - lo.f - lo.slope * d);
                if (std::abs(denom) > 1e-300) {
                    const double cand = lo.alpha - lo.slope * d * d / denom;
                    const double margin = 0.1 * std::abs(d);
                    if (cand > std::min(lo.alpha, hi.alpha) + margin &&
                        cand < std::max(lo.alpha, hi.alpha) - margin)
                        alpha = cand;
                }
            }
            LinePoint p = ls.eval(alpha);
            if (!std::isfinite(p.f) || p.f > f0 + c1 * alpha * slope0 || p.f >= lo.f) {
                hi = p;
            } else {
                if (std::abs(p.slope) <= -c2 * slope0) {
                    out = p;
                    return p.alpha;
                }
                if (p.slope * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
                lo = p;
            }
            if (std::abs(hi.alpha - lo.alpha) < 1e-16 * std::max(1.0, std::abs(lo.alpha))) break;
        }
        // Accept the best sufficient-decrease point found, if any.
        if (std::isfinite(lo.f) && lo.f < f0 && lo.alpha > 0.0) {
            out = lo;
            return lo.alpha;
        }
        return 0.0;
    };

    LinePoint prev = start;  // alpha = 0 point
    prev.f = f0;
    prev.slope = slope0;
    double alpha = 1.0;
    for (int i = 0; i < opts.ls_max_evals; ++i) {
        LinePoint p = ls.eval(alpha);
        if (!std::isfinite(p.f)) {
            // Shrink hard until the point is admissible.
            alpha *= 0.25;
            if (alpha < 1e-20) return 0.0;
            continue;
        }
        if (p.f > f0 + c1 * alpha * slope0 || (i > 0 && p.f >= prev.f)) return zoom(prev, p);
        if (std::abs(p.slope) <= -c2 * slope0) {
            out = p;
            return p.alpha;
        }
        if (p.slope >= 0.0) return zoom(p, prev);
        prev = p;
        alpha = std::min(2.5 * alpha, 1e10);
    }
    return 0.0;
}

}  // namespace

BfgsResult minimize_bfgs(const Objective& objective, VectorXd x0, const BfgsOptions& opts) {
    const Eigen::Index n = x0.size();
    BfgsResult res;
    res.x = std::move(x0);
    res.grad.resize(n);
    res.f = objective(res.x, &res.grad);
    res.n_evals = 1;
    if (!std::isfinite(res.f)) {
        res.stop_reason = "objective not finite at the starting point";
        return res;
    }

    MatrixXd Hinv = MatrixXd::Identity(n, n);
    bool reset_done = false;
    VectorXd x_new(n), g_new(n);

    for (int iter = 0; iter < opts.max_iter; ++iter) {
        res.iterations = iter;
        if (res.grad.cwiseAbs().maxCoeff() <= opts.grad_tol) {
            res.converged = true;
            res.stop_reason = "gradient below tolerance";
            return res;
        }

        VectorXd dir = -(Hinv * res.grad);
        double slope = dir.dot(res.grad);
        if (!(slope < 0.0)) {
            Hinv.setIdentity();
            dir = -res.grad;
            slope = dir.dot(res.grad);
        }

        LineSearchState ls{objective, res.x, dir};
        LinePoint accepted;
        LinePoint origin;
        const double alpha = wolfe_search(ls, origin, res.f, slope, opts, accepted);
        res.n_evals += ls.n_evals;
        if (alpha <= 0.0) {
            if (!reset_done) {
                reset_done = true;
                Hinv.setIdentity();
                continue;
            }
            res.stop_reason = "line search failed";
            // A stalled line search at a finite point usually means the
            // objective cannot be improved at double precision.
            res.converged = res.grad.cwiseAbs().maxCoeff() <= 1e3 * opts.grad_tol;
            return res;
        }
        reset_done = false;

        x_new = res.x + alpha * dir;
        g_new = ls.g_buf;  // gradient at the accepted point
        const VectorXd s = x_new - res.x;
        const VectorXd y = g_new - res.grad;
        const double sy = s.dot(y);
        const double f_old = res.f;
        res.x = x_new;
        res.f = accepted.f;
        res.grad = g_new;

        if (std::abs(f_old - res.f) <= opts.f_tol * std::max(1.0, std::abs(f_old))) {
            res.converged = true;
            res.stop_reason = "objective stagnated";
            res.iterations = iter + 1;
            return res;
        }

        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (iter == 0) Hinv *= sy / y.squaredNorm();
            const VectorXd Hy = Hinv * y;
            const double yHy = y.dot(Hy);
            // BFGS inverse update.
            Hinv += ((sy + yHy) / (sy * sy)) * (s * s.transpose());
            const MatrixXd Hys = Hy * s.transpose();
            Hinv -= (Hys + Hys.transpose()) / sy;
        }
    }
    res.iterations = opts.max_iter;
    res.stop_reason = "iteration limit reached";
    return res;
}

}  // namespace mgarch
