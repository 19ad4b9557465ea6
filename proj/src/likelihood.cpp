#include "mgarch/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <vector>

#include <json.hpp>

#include "mgarch/bfgs.hpp"
#include "mgarch/corrfilter.hpp"
#include "mgarch/parallel.hpp"
#include "mgarch/rng.hpp"
#include "mgarch/stationarity.hpp"
#include "mgarch/transforms.hpp"
#include "mgarch/volfilter.hpp"

namespace mgarch {

void FitOptions::validate() const {
    if (n_starts < 1) throw ConstraintViolation("fit options: n_starts must be >= 1");
    if (max_iter < 1) throw ConstraintViolation("fit options: max_iter must be >= 1");
    if (!(grad_tol > 0.0)) throw ConstraintViolation("fit options: grad_tol must be positive");
    if (!(log_floor > 0.0)) throw ConstraintViolation("fit options: log_floor must be positive");
    if (!(margin > 0.0) || margin >= 0.1)
        throw ConstraintViolation("fit options: margin must lie in (0, 0.1)");
    if (threads < 1) throw ConstraintViolation("fit options: threads must be >= 1");
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogHBound = 700.0;

}  // namespace

LikelihoodEval eval_likelihood(const GeneralParams& p, const MatrixXd& panel, unsigned want,
                               double log_floor, double eig_floor, double penalty_weight) {
    const ModelOrder& order = p.order;
    const int m = order.m;
    const int K = order.k_window;
    const int nd = order.dim_delta();
    const int d = order.dim_general();
    const Eigen::Index n = panel.rows();
    const bool need_grad = (want & (kEvalGradient | kEvalScores)) != 0;

    LikelihoodEval out;
    if (panel.cols() != m) {
        out.what = "panel has wrong column count";
        return out;
    }
    if (n < K + 1) {
        out.what = "need at least k_window + 1 observations";
        return out;
    }

    MatrixXd log_sq;
    try {
        log_sq = log_sq_returns(panel, log_floor);
    } catch (const Error& e) {
        out.what = e.what();
        return out;
    }

    VolDerivState vol(order);

    // Residual window, oldest first; pre-sample entries carry the residuals
    // of the all-ones history whose only parameter dependence is through the
    // intercepts.
    std::vector<VectorXd> win_eps(static_cast<std::size_t>(K));
    std::vector<MatrixXd> win_U;
    const VectorXd eps_pre = (-0.5 * p.omega_bar).array().exp();
    for (auto& e : win_eps) e = eps_pre;
    MatrixXd U_pre;
    if (need_grad) {
        U_pre = MatrixXd::Zero(nd, m);
        U_pre.topLeftCorner(m, m).setIdentity();
        win_U.assign(static_cast<std::size_t>(K), U_pre);
    }
    std::size_t head = 0;

    MatrixXd R_prev = p.Rbar;
    std::vector<MatrixXd> dR;
    std::vector<MatrixXd> dPsi;
    MatrixXd dR_b1, dR_b2;
    double c_rbar = 1.0;
    if (need_grad) {
        dR.assign(static_cast<std::size_t>(nd), MatrixXd::Zero(m, m));
        dPsi.assign(static_cast<std::size_t>(nd), MatrixXd::Zero(m, m));
        dR_b1 = MatrixXd::Zero(m, m);
        dR_b2 = MatrixXd::Zero(m, m);
        out.grad = VectorXd::Zero(d);
        if (want & kEvalScores) out.scores = MatrixXd::Zero(n, d);
    }

    MatrixXd U_t, S(m, m), psi(m, m), T(m, m), R_t(m, m), Rinv(m, m), B(m, m);
    if (need_grad) U_t.resize(nd, m);
    VectorXd lnh(m), eps(m), z(m), w(m), q(m), inv_sq(m), cq(m), g_t;
    if (need_grad) g_t.resize(d);

    double nll = 0.0;
    auto fail = [&](Eigen::Index t, const std::string& why) {
        out.first_bad_t = t;
        out.what = why;
        return out;
    };

    for (Eigen::Index t = 0; t < n; ++t) {
        lnh = vol.log_h(p);
        if (!lnh.allFinite() || lnh.cwiseAbs().maxCoeff() > kLogHBound)
            return fail(t + 1, "log variance overflow");
        const VectorXd dvec = (0.5 * lnh).array().exp();
        eps = panel.row(t).transpose().cwiseQuotient(dvec);

        // Gram of the residual window.
        S.setZero();
        for (int u = 0; u < K; ++u) {
            const VectorXd& e = win_eps[(head + static_cast<std::size_t>(u)) % static_cast<std::size_t>(K)];
            S.selfadjointView<Eigen::Lower>().rankUpdate(e);
        }
        S.triangularView<Eigen::StrictlyUpper>() = S.transpose();
        for (int i = 0; i < m; ++i) {
            q[i] = S(i, i);
            if (!(q[i] > 0.0)) return fail(t + 1, "degenerate residual column in window");
            inv_sq[i] = 1.0 / std::sqrt(q[i]);
        }
        psi = inv_sq.asDiagonal() * S * inv_sq.asDiagonal();
        for (int i = 0; i < m; ++i) psi(i, i) = 1.0;

        if (need_grad) {
            vol.fill_dlogh(p, U_t);
            // d psi / d delta through the window residuals, then the
            // correlation recursion.
            for (int l = 0; l < nd; ++l) dPsi[static_cast<std::size_t>(l)].setZero();
            for (int u = 0; u < K; ++u) {
                const std::size_t slot = (head + static_cast<std::size_t>(u)) % static_cast<std::size_t>(K);
                const VectorXd& e = win_eps[slot];
                const MatrixXd& Uw = win_U[slot];
                for (int l = 0; l < nd; ++l) {
                    MatrixXd& Tl = dPsi[static_cast<std::size_t>(l)];
                    // accumulate -(1/2) (v e' + e v') with v = Uw.row(l) .* e
                    for (int j = 0; j < m; ++j) {
                        const double ej = e[j];
                        const double vj = Uw(l, j) * ej;
                        for (int i = 0; i < m; ++i)
                            Tl(i, j) -= 0.5 * (Uw(l, i) * e[i] * ej + e[i] * vj);
                    }
                }
            }
            for (int l = 0; l < nd; ++l) {
                MatrixXd& Tl = dPsi[static_cast<std::size_t>(l)];
                // quotient rule: scale the cross sums and subtract the
                // diagonal-variance drift terms
                for (int i = 0; i < m; ++i) cq[i] = 0.5 * Tl(i, i) / q[i];
                for (int j = 0; j < m; ++j)
                    for (int i = 0; i < m; ++i)
                        Tl(i, j) = Tl(i, j) * inv_sq[i] * inv_sq[j] - psi(i, j) * (cq[i] + cq[j]);
                for (int i = 0; i < m; ++i) Tl(i, i) = 0.0;
                // advance the correlation-derivative recursion
                dR[static_cast<std::size_t>(l)] =
                    p.beta1 * Tl + p.beta2 * dR[static_cast<std::size_t>(l)];
            }
            dR_b1 = -p.Rbar + psi + p.beta2 * dR_b1;
            dR_b2 = -p.Rbar + R_prev + p.beta2 * dR_b2;
            c_rbar = (1.0 - p.beta1 - p.beta2) + p.beta2 * c_rbar;
        }

        R_t = step_R(psi, p.beta1, p.beta2, p.Rbar, R_prev);
        Eigen::LLT<MatrixXd> llt(R_t);
        if (llt.info() != Eigen::Success) {
            auto repaired = ensure_pd(R_t, eig_floor);
            R_t = repaired.first;
            ++out.pd_repairs;
            llt.compute(R_t);
            if (llt.info() != Eigen::Success)
                return fail(t + 1, "correlation matrix not positive definite after repair");
        }
        z = llt.solve(eps);
        double logdet = 0.0;
        for (int i = 0; i < m; ++i) logdet += std::log(llt.matrixLLT()(i, i));
        logdet *= 2.0;
        const double ll_t = 0.5 * (eps.dot(z) + lnh.sum() + logdet);
        if (!std::isfinite(ll_t)) return fail(t + 1, "non-finite log-likelihood term");
        nll += ll_t;

        if (need_grad) {
            w = VectorXd::Ones(m) - eps.cwiseProduct(z);
            Rinv = llt.solve(MatrixXd::Identity(m, m));
            B.noalias() = Rinv - z * z.transpose();
            g_t.head(nd).noalias() = 0.5 * (U_t * w);
            for (int l = 0; l < nd; ++l)
                g_t[l] += 0.5 * B.cwiseProduct(dR[static_cast<std::size_t>(l)]).sum();
            g_t[nd] = 0.5 * B.cwiseProduct(dR_b1).sum();
            g_t[nd + 1] = 0.5 * B.cwiseProduct(dR_b2).sum();
            int pos = nd + 2;
            for (int j = 0; j < m; ++j)
                for (int i = j + 1; i < m; ++i) g_t[pos++] = c_rbar * B(i, j);
            out.grad += g_t;
            if (want & kEvalScores) out.scores.row(t) = g_t.transpose();
        }

        win_eps[head] = eps;
        if (need_grad) win_U[head] = U_t;
        head = (head + 1) % static_cast<std::size_t>(K);
        R_prev = R_t;
        vol.advance(p, log_sq.row(t).transpose());
    }

    out.nll = nll + penalty_weight * out.pd_repairs;
    out.ok = true;
    return out;
}

double neg_loglik(const GeneralParams& p, const MatrixXd& panel, double log_floor) {
    LikelihoodEval ev = eval_likelihood(p, panel, kEvalObjective, log_floor);
    if (!ev.ok) {
        if (ev.what == "log variance overflow")
            throw OverflowError("neg_loglik: log variance overflow at t=" +
                                std::to_string(ev.first_bad_t));
        throw NonFiniteError("neg_loglik: " + ev.what +
                             (ev.first_bad_t > 0 ? " at t=" + std::to_string(ev.first_bad_t) : ""));
    }
    return ev.nll;
}

VectorXd grad_neg_loglik(const GeneralParams& p, const MatrixXd& panel, double log_floor) {
    LikelihoodEval ev = eval_likelihood(p, panel, kEvalGradient, log_floor);
    if (!ev.ok)
        throw NonFiniteError("grad_neg_loglik: " + ev.what +
                             (ev.first_bad_t > 0 ? " at t=" + std::to_string(ev.first_bad_t) : ""));
    return ev.grad;
}

MatrixXd lowrank_jacobian(const LowRankParams& lr) {
    const ModelOrder& o = lr.order;
    const int m = o.m;
    const int d = o.dim_general();
    const int ds = o.dim_lowrank();
    MatrixXd J = MatrixXd::Zero(d, ds);
    const int scalars = m + o.r + 2 * o.s;
    J.topLeftCorner(scalars, scalars).setIdentity();

    int row = scalars;      // start of vec(G) blocks in the full packing
    int col = scalars;      // start of factor blocks in the factor packing
    auto outer_block = [&](const VectorXd& left, const VectorXd& right) {
        // d vec(left right') / d left = right kron I, / d right = I kron left
        for (int c = 0; c < m; ++c)
            for (int b = 0; b < m; ++b) {
                J(row + c * m + b, col + b) += right[c];
                J(row + c * m + b, col + m + c) += left[b];
            }
    };
    for (int k = 0; k < o.r; ++k) {
        const auto& pair = lr.g0[static_cast<std::size_t>(k)];
        outer_block(pair[0], pair[1]);
        row += m * m;
        col += 2 * m;
    }
    for (const auto* quads : {&lr.g1, &lr.g2}) {
        for (int k = 0; k < o.s; ++k) {
            const auto& quad = (*quads)[static_cast<std::size_t>(k)];
            outer_block(quad[0], quad[1]);
            col += 2 * m;
            outer_block(quad[2], quad[3]);
            col += 2 * m;
            row += m * m;
        }
    }
    // beta1, beta2 and the correlation entries map one-to-one.
    const int tail = 2 + m * (m - 1) / 2;
    J.bottomRightCorner(tail, tail).setIdentity();
    return J;
}

namespace {

// Gradient pullback through the factor map without forming the Jacobian:
// for G = u v' the chain gives grad_u = Gmat v, grad_v = Gmat' u with Gmat the
// matrix reshape of the vec(G) gradient block.
VectorXd pullback_to_factors(const LowRankParams& lr, const VectorXd& grad_theta) {
    const ModelOrder& o = lr.order;
    const int m = o.m;
    VectorXd g(o.dim_lowrank());
    const int scalars = m + o.r + 2 * o.s;
    g.head(scalars) = grad_theta.head(scalars);
    int row = scalars;
    int col = scalars;
    auto pull_pair = [&](const VectorXd& left, const VectorXd& right) {
        Eigen::Map<const MatrixXd> Gmat(grad_theta.data() + row, m, m);
        g.segment(col, m) = Gmat * right;
        g.segment(col + m, m) = Gmat.transpose() * left;
        col += 2 * m;
    };
    for (int k = 0; k < o.r; ++k) {
        pull_pair(lr.g0[static_cast<std::size_t>(k)][0], lr.g0[static_cast<std::size_t>(k)][1]);
        row += m * m;
    }
    for (const auto* quads : {&lr.g1, &lr.g2}) {
        for (int k = 0; k < o.s; ++k) {
            const auto& quad = (*quads)[static_cast<std::size_t>(k)];
            pull_pair(quad[0], quad[1]);
            pull_pair(quad[2], quad[3]);
            row += m * m;
        }
    }
    const int tail = 2 + m * (m - 1) / 2;
    g.tail(tail) = grad_theta.tail(tail);
    return g;
}

struct PanelStats {
    VectorXd omega0;   // log of marginal variances
    MatrixXd corr0;    // correlation of standardized returns, PD-adjusted
};

PanelStats panel_stats(const MatrixXd& panel) {
    const Eigen::Index n = panel.rows(), m = panel.cols();
    PanelStats st;
    st.omega0.resize(m);
    MatrixXd standardized(n, m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const double var = panel.col(j).squaredNorm() / static_cast<double>(n);
        const double safe = std::max(var, 1e-12);
        st.omega0[j] = std::log(safe);
        standardized.col(j) = panel.col(j) / std::sqrt(safe);
    }
    MatrixXd corr = (standardized.transpose() * standardized) / static_cast<double>(n);
    VectorXd dd = corr.diagonal().cwiseSqrt();
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) corr(i, j) /= dd[i] * dd[j];
    corr = 0.5 * (corr + corr.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(corr);
    const double floor = 1e-3;
    if (es.eigenvalues().minCoeff() < floor) {
        const double shrink = 0.9;
        corr = shrink * corr + (1.0 - shrink) * MatrixXd::Identity(m, m);
    }
    for (Eigen::Index i = 0; i < m; ++i) corr(i, i) = 1.0;
    st.corr0 = corr;
    return st;
}

// Sign pattern for the real decay rates of a given start: cycle through all
// 2^r combinations so both branches of the disconnected domain get explored
// deterministically, then continue randomly.
std::vector<int> lambda_signs(int r, int start_idx, std::mt19937_64& eng) {
    std::vector<int> signs(static_cast<std::size_t>(r), 1);
    if (r == 0) return signs;
    if (r <= 10 && start_idx < (1 << r)) {
        for (int k = 0; k < r; ++k) signs[static_cast<std::size_t>(k)] = (start_idx >> k) & 1 ? -1 : 1;
        return signs;
    }
    std::bernoulli_distribution flip(0.5);
    for (int k = 0; k < r; ++k) signs[static_cast<std::size_t>(k)] = flip(eng) ? -1 : 1;
    return signs;
}

GeneralParams draw_start_general(const ModelOrder& order, const PanelStats& st,
                                 const std::vector<int>& signs, std::mt19937_64& eng) {
    std::uniform_real_distribution<double> mag(0.3, 0.9);
    std::uniform_real_distribution<double> angle(0.5, 2.5);
    std::normal_distribution<double> coef(0.0, 0.05);
    GeneralParams p;
    p.order = order;
    p.omega_bar = st.omega0;
    p.lambda.resize(order.r);
    for (int k = 0; k < order.r; ++k) p.lambda[k] = signs[static_cast<std::size_t>(k)] * mag(eng);
    p.gamma.resize(order.s);
    p.phi.resize(order.s);
    for (int k = 0; k < order.s; ++k) {
        p.gamma[k] = mag(eng);
        p.phi[k] = angle(eng);
    }
    auto draw_matrix = [&]() {
        MatrixXd g(order.m, order.m);
        for (int j = 0; j < order.m; ++j)
            for (int i = 0; i < order.m; ++i) g(i, j) = coef(eng);
        return g;
    };
    for (int k = 0; k < order.r; ++k) p.G0.push_back(draw_matrix());
    for (int k = 0; k < order.s; ++k) p.G1.push_back(draw_matrix());
    for (int k = 0; k < order.s; ++k) p.G2.push_back(draw_matrix());
    p.beta1 = 0.05;
    p.beta2 = 0.80;
    p.Rbar = st.corr0;
    return p;
}

LowRankParams draw_start_lowrank(const ModelOrder& order, const PanelStats& st,
                                 const std::vector<int>& signs, std::mt19937_64& eng) {
    GeneralParams shell = draw_start_general(order, st, signs, eng);
    std::normal_distribution<double> factor(0.0, 0.2);
    LowRankParams p;
    p.order = order;
    p.omega_bar = shell.omega_bar;
    p.lambda = shell.lambda;
    p.gamma = shell.gamma;
    p.phi = shell.phi;
    auto draw_vec = [&]() {
        VectorXd v(order.m);
        for (int i = 0; i < order.m; ++i) v[i] = factor(eng);
        return v;
    };
    for (int k = 0; k < order.r; ++k) p.g0.push_back({draw_vec(), draw_vec()});
    for (int k = 0; k < order.s; ++k) p.g1.push_back({draw_vec(), draw_vec(), draw_vec(), draw_vec()});
    for (int k = 0; k < order.s; ++k) p.g2.push_back({draw_vec(), draw_vec(), draw_vec(), draw_vec()});
    p.beta1 = shell.beta1;
    p.beta2 = shell.beta2;
    p.Rbar = shell.Rbar;
    return p;
}

LowRankParams canonicalize_lowrank(const LowRankParams& lr, double tol) {
    // Sort blocks like the full-parameter canonical form, permuting the
    // factor groups in lockstep.
    GeneralParams probe = theta_of_vartheta(lr);
    canonicalize(probe, tol);  // throws on duplicates
    LowRankParams out = lr;
    std::vector<int> ord(static_cast<std::size_t>(lr.order.r));
    for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = static_cast<int>(i);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return lr.lambda[a] > lr.lambda[b]; });
    for (int k = 0; k < lr.order.r; ++k) {
        out.lambda[k] = lr.lambda[ord[static_cast<std::size_t>(k)]];
        out.g0[static_cast<std::size_t>(k)] = lr.g0[static_cast<std::size_t>(ord[static_cast<std::size_t>(k)])];
    }
    std::vector<int> ords(static_cast<std::size_t>(lr.order.s));
    for (std::size_t i = 0; i < ords.size(); ++i) ords[i] = static_cast<int>(i);
    std::sort(ords.begin(), ords.end(), [&](int a, int b) { return lr.gamma[a] > lr.gamma[b]; });
    for (int k = 0; k < lr.order.s; ++k) {
        const auto src = static_cast<std::size_t>(ords[static_cast<std::size_t>(k)]);
        out.gamma[k] = lr.gamma[ords[static_cast<std::size_t>(k)]];
        out.phi[k] = lr.phi[ords[static_cast<std::size_t>(k)]];
        out.g1[static_cast<std::size_t>(k)] = lr.g1[src];
        out.g2[static_cast<std::size_t>(k)] = lr.g2[src];
    }
    return out;
}

struct StartOutcome {
    bool usable = false;
    double f = kInf;
    BfgsResult opt;
    TransformSpec spec;
};

FitReport fit_impl(const MatrixXd& panel, const ModelOrder& order, const FitOptions& opts,
                   bool lowrank) {
    opts.validate();
    order.validate();
    const Eigen::Index n = panel.rows();
    if (panel.cols() != order.m) throw DimensionMismatch("fit: panel has wrong column count");
    if (n < order.k_window + 10)
        throw DimensionMismatch("fit: need at least k_window + 10 observations");

    const PanelStats st = panel_stats(panel);
    std::vector<StartOutcome> outcomes(static_cast<std::size_t>(opts.n_starts));

    parallel_for(static_cast<std::size_t>(opts.n_starts), opts.threads, [&](std::size_t idx) {
        auto& outcome = outcomes[idx];
        std::mt19937_64 eng = make_engine(opts.seed, idx);
        TransformSpec spec;
        spec.order = order;
        spec.eta = opts.margin;
        spec.lowrank = lowrank;
        spec.lambda_sign = lambda_signs(order.r, static_cast<int>(idx), eng);
        VectorXd x0;
        if (lowrank) {
            LowRankParams p0 = draw_start_lowrank(order, st, spec.lambda_sign, eng);
            x0 = encode_lowrank(spec, p0);
        } else {
            GeneralParams p0 = draw_start_general(order, st, spec.lambda_sign, eng);
            x0 = encode_general(spec, p0);
        }

        const double scale = 1.0 / static_cast<double>(n);
        Objective obj = [&](const VectorXd& x, VectorXd* grad) -> double {
            GeneralParams gp;
            LowRankParams lr;
            if (lowrank) {
                lr = decode_lowrank(spec, x);
                gp = theta_of_vartheta(lr);
            } else {
                gp = decode_general(spec, x);
            }
            LikelihoodEval ev = eval_likelihood(gp, panel, grad ? kEvalGradient : kEvalObjective,
                                                opts.log_floor, opts.eig_floor, opts.penalty_weight);
            if (!ev.ok) return kInf;
            if (grad) {
                VectorXd natural = lowrank ? pullback_to_factors(lr, ev.grad) : ev.grad;
                *grad = pullback_gradient(spec, x, natural) * scale;
            }
            return ev.nll * scale;
        };

        BfgsOptions bopr;
        bopr.max_iter = opts.max_iter;
        bopr.grad_tol = opts.grad_tol;
        outcome.opt = minimize_bfgs(obj, x0, bopr);
        outcome.spec = std::move(spec);
        outcome.f = outcome.opt.f;
        outcome.usable = std::isfinite(outcome.opt.f);
    });

    int best = -1;
    int total_evals = 0;
    for (int i = 0; i < opts.n_starts; ++i) {
        total_evals += outcomes[static_cast<std::size_t>(i)].opt.n_evals;
        if (!outcomes[static_cast<std::size_t>(i)].usable) continue;
        if (best < 0 || outcomes[static_cast<std::size_t>(i)].f < outcomes[static_cast<std::size_t>(best)].f)
            best = i;
    }
    if (best < 0)
        throw NoConvergence("fit: no start produced a finite objective");

    const StartOutcome& win = outcomes[static_cast<std::size_t>(best)];
    FitReport rep;
    rep.n = static_cast<int>(n);
    rep.seed = opts.seed;
    rep.best_start = best;
    rep.n_evals = total_evals;
    rep.converged = win.opt.converged;
    rep.stop_reason = win.opt.stop_reason;
    rep.gradient_norm = win.opt.grad.size() ? win.opt.grad.cwiseAbs().maxCoeff() : kInf;

    if (lowrank) {
        LowRankParams lr = decode_lowrank(win.spec, win.opt.x);
        try {
            lr = canonicalize_lowrank(lr, 1e-10);
        } catch (const DuplicateEigenvalue&) {
            rep.canonical = false;
        }
        lr = normalize_factors(lr);
        rep.lowrank = lr;
        rep.params = theta_of_vartheta(lr);
    } else {
        GeneralParams gp = decode_general(win.spec, win.opt.x);
        try {
            gp = canonicalize(gp, 1e-10);
        } catch (const DuplicateEigenvalue&) {
            rep.canonical = false;
        }
        rep.params = gp;
    }

    // Clean objective at the optimum: separates the likelihood value from any
    // repair penalties and records the repair count.
    LikelihoodEval final_eval = eval_likelihood(rep.params, panel, kEvalObjective, opts.log_floor,
                                                opts.eig_floor, opts.penalty_weight);
    if (final_eval.ok) {
        rep.pd_repair_count = final_eval.pd_repairs;
        rep.neg_loglik = final_eval.nll - opts.penalty_weight * final_eval.pd_repairs;
    } else {
        rep.neg_loglik = win.opt.f * static_cast<double>(n);
    }
    rep.stationarity_margin = check_stationarity(rep.params).min_sum;
    return rep;
}

}  // namespace

FitReport fit_general(const MatrixXd& panel, const ModelOrder& order, const FitOptions& opts) {
    return fit_impl(panel, order, opts, false);
}

FitReport fit_lowrank(const MatrixXd& panel, const ModelOrder& order, const FitOptions& opts) {
    return fit_impl(panel, order, opts, true);
}

std::string fit_report_to_json(const FitReport& rep, const FitOptions& opts) {
    nlohmann::json j;
    const ModelOrder& o = rep.params.order;
    j["order"] = {{"m", o.m}, {"r", o.r}, {"s", o.s}, {"k_window", o.k_window}};
    j["mode"] = rep.is_lowrank() ? "lowrank" : "general";
    const VectorXd theta = pack(rep.params);
    j["theta"] = std::vector<double>(theta.data(), theta.data() + theta.size());
    if (rep.lowrank) {
        const VectorXd vt = pack(*rep.lowrank);
        j["vartheta"] = std::vector<double>(vt.data(), vt.data() + vt.size());
    }
    j["neg_loglik"] = rep.neg_loglik;
    j["converged"] = rep.converged;
    j["n_evals"] = rep.n_evals;
    j["gradient_norm"] = rep.gradient_norm;
    j["stationarity_margin"] = rep.stationarity_margin;
    j["pd_repair_count"] = rep.pd_repair_count;
    j["n"] = rep.n;
    j["seed"] = rep.seed;
    j["best_start"] = rep.best_start;
    j["stop_reason"] = rep.stop_reason;
    j["canonical"] = rep.canonical;
    j["options"] = {{"n_starts", opts.n_starts},   {"max_iter", opts.max_iter},
                    {"grad_tol", opts.grad_tol},   {"log_floor", opts.log_floor},
                    {"eig_floor", opts.eig_floor}, {"penalty_weight", opts.penalty_weight},
                    {"margin", opts.margin},       {"threads", opts.threads}};
    return j.dump(2);
}

FitReport fit_report_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid fit report JSON: ") + e.what());
    }
    const auto& jo = j.at("order");
    ModelOrder order(jo.at("m").get<int>(), jo.at("r").get<int>(), jo.at("s").get<int>(),
                     jo.at("k_window").get<int>());
    FitReport rep;
    const auto theta = j.at("theta").get<std::vector<double>>();
    rep.params = unpack(Eigen::Map<const VectorXd>(theta.data(), static_cast<int>(theta.size())), order);
    if (j.contains("vartheta")) {
        const auto vt = j.at("vartheta").get<std::vector<double>>();
        rep.lowrank = unpack_lowrank(Eigen::Map<const VectorXd>(vt.data(), static_cast<int>(vt.size())), order);
    }
    rep.neg_loglik = j.at("neg_loglik").get<double>();
    rep.converged = j.at("converged").get<bool>();
    rep.n_evals = j.value("n_evals", 0);
    rep.gradient_norm = j.value("gradient_norm", 0.0);
    rep.stationarity_margin = j.value("stationarity_margin", 0.0);
    rep.pd_repair_count = j.value("pd_repair_count", 0);
    rep.n = j.value("n", 0);
    rep.seed = j.value("seed", static_cast<std::uint64_t>(0));
    rep.best_start = j.value("best_start", -1);
    rep.stop_reason = j.value("stop_reason", std::string());
    rep.canonical = j.value("canonical", true);
    return rep;
}

}  // namespace mgarch
