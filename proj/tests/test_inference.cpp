#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mgarch/inference.hpp"
#include "mgarch/simulate.hpp"
#include "mgarch/stats.hpp"
#include "testutil.hpp"

using namespace mgarch;

namespace {

struct FittedCase {
    MatrixXd panel;
    FitReport fit;
};

const FittedCase& dgp1_fit() {
    static const FittedCase c = [] {
        FittedCase out;
        const GeneralParams truth = dgp_catalog("DGP1");
        out.panel = simulate_path(truth, 1200, 200, InnovationSpec{}, 314).panel;
        FitOptions opts;
        opts.n_starts = 3;
        opts.seed = 21;
        opts.max_iter = 400;
        out.fit = fit_general(out.panel, truth.order, opts);
        return out;
    }();
    return c;
}

}  // namespace

TEST_CASE("per-observation scores decompose the prefix gradients") {
    std::mt19937_64 eng(211);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const GeneralParams p = testutil::random_params(ModelOrder(2, 1, 0), eng);
    const int n = 40;
    MatrixXd panel(n, 2);
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < 2; ++j) panel(t, j) = gauss(eng);

    const LikelihoodEval full = eval_likelihood(p, panel, kEvalScores);
    REQUIRE(full.ok);
    // the evaluator is causal, so the gradient of a prefix equals the sum of
    // the first t per-observation scores
    for (int t : {5, 17, 33, n}) {
        const VectorXd prefix_grad = grad_neg_loglik(p, panel.topRows(t));
        const VectorXd partial = full.scores.topRows(t).colwise().sum().transpose();
        CHECK((prefix_grad - partial).cwiseAbs().maxCoeff() <
              1e-9 * std::max(1.0, prefix_grad.norm()));
    }
}

TEST_CASE("score outer product matches a finite-difference oracle") {
    std::mt19937_64 eng(223);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const GeneralParams p = testutil::random_params(ModelOrder(2, 1, 0), eng);
    const int n = 40;
    MatrixXd panel(n, 2);
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < 2; ++j) panel(t, j) = gauss(eng);

    // finite-difference per-observation scores via prefix differences of the
    // objective
    const int d = p.order.dim_general();
    const VectorXd theta = pack(p);
    const int t0 = p.order.k_window + 1;
    MatrixXd fd_scores = MatrixXd::Zero(n, d);
    VectorXd probe = theta;
    for (int k = 0; k < d; ++k) {
        std::vector<double> up(static_cast<std::size_t>(n + 1), 0.0);
        std::vector<double> dn(static_cast<std::size_t>(n + 1), 0.0);
        probe[k] = theta[k] + 1e-6;
        for (int t = t0; t <= n; ++t)
            up[static_cast<std::size_t>(t)] =
                neg_loglik(unpack_unchecked(probe, p.order), panel.topRows(t));
        probe[k] = theta[k] - 1e-6;
        for (int t = t0; t <= n; ++t)
            dn[static_cast<std::size_t>(t)] =
                neg_loglik(unpack_unchecked(probe, p.order), panel.topRows(t));
        probe[k] = theta[k];
        for (int t = t0 + 1; t <= n; ++t) {
            const double dup = up[static_cast<std::size_t>(t)] - up[static_cast<std::size_t>(t - 1)];
            const double ddn = dn[static_cast<std::size_t>(t)] - dn[static_cast<std::size_t>(t - 1)];
            fd_scores(t - 1, k) = (dup - ddn) / 2e-6;
        }
    }
    const LikelihoodEval ev = eval_likelihood(p, panel, kEvalScores);
    REQUIRE(ev.ok);
    // compare the partial average outer products over the checked rows
    MatrixXd sigma_fd = MatrixXd::Zero(d, d);
    MatrixXd sigma_an = MatrixXd::Zero(d, d);
    for (int t = t0; t < n; ++t) {
        sigma_fd += fd_scores.row(t).transpose() * fd_scores.row(t);
        sigma_an += ev.scores.row(t).transpose() * ev.scores.row(t);
    }
    const double rel = (sigma_fd - sigma_an).norm() / std::max(1.0, sigma_an.norm());
    CHECK(rel < 1e-4);
}

TEST_CASE("score covariance is positive semidefinite at the optimum") {
    const auto& c = dgp1_fit();
    const MatrixXd sigma = estimate_sigma(c.fit.params, c.panel);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    CHECK((sigma - sigma.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Hessian estimate is symmetric and positive definite at the optimum") {
    const auto& c = dgp1_fit();
    const MatrixXd star = estimate_sigma_star(c.fit.params, c.panel);
    CHECK((star - star.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(star);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("information matrix equality holds approximately under Gaussian truth") {
    const GeneralParams truth = dgp_catalog("DGP1");
    const MatrixXd panel = simulate_path(truth, 5000, 200, InnovationSpec{}, 1618).panel;
    FitOptions opts;
    opts.n_starts = 2;
    opts.seed = 5;
    opts.max_iter = 400;
    const FitReport fit = fit_general(panel, truth.order, opts);
    const MatrixXd sigma = estimate_sigma(fit.params, panel);
    const MatrixXd star = estimate_sigma_star(fit.params, panel);
    const double rel = (sigma - star).norm() / star.norm();
    CHECK(rel < 0.15);
}

TEST_CASE("sandwich inverse is consistent") {
    const auto& c = dgp1_fit();
    const CovReport cov = asymptotic_cov(c.fit, c.panel);
    CHECK(cov.mode == CovReport::Mode::General);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(cov.sigma_star_hat);
    const MatrixXd inv =
        es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    CHECK((cov.sigma_star_hat * inv - MatrixXd::Identity(inv.rows(), inv.cols()))
              .cwiseAbs()
              .maxCoeff() < 1e-8);
    const VectorXd se = cov.standard_errors();
    CHECK(se.minCoeff() > 0.0);
    CHECK((cov.avar - cov.avar.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("identity factor-map projection reproduces the sandwich") {
    // With an identity factor map the projection collapses, exercised
    // directly on the projection algebra with synthetic matrices.
    const int d = 6;
    std::mt19937_64 eng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatrixXd A(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) A(i, j) = gauss(eng);
    const MatrixXd star = A * A.transpose() + d * MatrixXd::Identity(d, d);
    const MatrixXd delta = MatrixXd::Identity(d, d);
    const MatrixXd M = delta.transpose() * star * delta;
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    VectorXd inv_sv = svd.singularValues().cwiseInverse();
    const MatrixXd P = delta * svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose() *
                       delta.transpose() * star;
    CHECK((P - MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("factor-restricted covariance has the factor-map rank") {
    const GeneralParams truth = dgp_catalog("DGP1");
    const MatrixXd panel = simulate_path(truth, 900, 200, InnovationSpec{}, 77).panel;
    FitOptions opts;
    opts.n_starts = 3;
    opts.seed = 13;
    opts.max_iter = 400;
    const FitReport fit = fit_lowrank(panel, truth.order, opts);
    REQUIRE(fit.is_lowrank());
    const CovReport cov = asymptotic_cov(fit, panel);
    CHECK(cov.mode == CovReport::Mode::LowRank);

    const MatrixXd delta = lowrank_jacobian(*fit.lowrank);
    auto rank_of = [](const MatrixXd& a) {
        Eigen::JacobiSVD<MatrixXd> svd(a);
        return (svd.singularValues().array() > 1e-9 * svd.singularValues()[0]).count();
    };
    const MatrixXd M = delta.transpose() * cov.sigma_star_hat * delta;
    Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const double cutoff = 1e-10 * svd.singularValues().maxCoeff();
    VectorXd inv_sv = svd.singularValues();
    for (Eigen::Index i = 0; i < inv_sv.size(); ++i)
        inv_sv[i] = inv_sv[i] > cutoff ? 1.0 / inv_sv[i] : 0.0;
    const MatrixXd P =
        delta * svd.matrixV() * inv_sv.asDiagonal() * svd.matrixU().transpose() * delta.transpose() *
        cov.sigma_star_hat;
    CHECK(rank_of(P) == rank_of(delta));
}

TEST_CASE("score covariance commutes with canonical reordering") {
    std::mt19937_64 eng(41);
    std::normal_distribution<double> gauss(0.0, 1.0);
    GeneralParams p = testutil::random_params(ModelOrder(2, 2, 0), eng);
    p.lambda << -0.6, 0.4;  // non-canonical order
    MatrixXd panel(120, 2);
    for (int t = 0; t < 120; ++t)
        for (int j = 0; j < 2; ++j) panel(t, j) = gauss(eng);

    const GeneralParams q = canonicalize(p);
    const MatrixXd sig_p = estimate_sigma(p, panel);
    const MatrixXd sig_q = estimate_sigma(q, panel);

    // permutation of the packed coordinates induced by swapping the blocks
    const int d = p.order.dim_general();
    Eigen::VectorXi perm(d);
    for (int i = 0; i < d; ++i) perm[i] = i;
    perm[2] = 3;
    perm[3] = 2;  // decay-rate block
    for (int i = 0; i < 4; ++i) {
        perm[4 + i] = 8 + i;  // coefficient matrix blocks swap
        perm[8 + i] = 4 + i;
    }
    MatrixXd permuted(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) permuted(i, j) = sig_p(perm[i], perm[j]);
    CHECK((permuted - sig_q).cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, sig_q.norm()));
}

TEST_CASE("spillover selector indices") {
    SUBCASE("documented single-one case") {
        const VectorXd c = spillover_cvec(ModelOrder(2, 1, 0), 1, 0);  // (i,j) = (2,1) 1-based
        CHECK(c.size() == 10);
        for (int k = 0; k < 10; ++k) CHECK(c[k] == (k == 4 ? 1.0 : 0.0));
    }
    SUBCASE("selector reproduces the first lag coefficient") {
        std::mt19937_64 eng(47);
        for (const ModelOrder& order : {ModelOrder(3, 1, 1), ModelOrder(4, 2, 1)}) {
            const GeneralParams p = testutil::random_params(order, eng);
            const MatrixXd phi1 = phi_matrix(p, 1);
            const VectorXd theta = pack(p);
            for (int i = 0; i < order.m; ++i)
                for (int j = 0; j < order.m; ++j) {
                    const VectorXd c = spillover_cvec(order, i, j);
                    CHECK(c.dot(theta) == doctest::Approx(phi1(i, j)).epsilon(1e-12));
                }
        }
    }
    SUBCASE("bad indices throw") {
        CHECK_THROWS_AS(spillover_cvec(ModelOrder(2, 1, 0), 2, 0), IndexOutOfRange);
    }
}

TEST_CASE("spillover z arithmetic") {
    // synthetic covariance with the diagonal tuned to give s.e. = 0.05
    GeneralParams p = dgp_catalog("DGP1");
    p.G0[0](1, 0) = 0.1;
    CovReport cov;
    cov.mode = CovReport::Mode::General;
    cov.n = 400;
    const int d = p.order.dim_general();
    cov.avar = MatrixXd::Zero(d, d);
    cov.avar(4, 4) = 0.05 * 0.05 * 400.0;
    const SpilloverResult res = spillover_test(p, cov, 1, 0);
    CHECK(res.estimate == doctest::Approx(0.1));
    CHECK(res.se == doctest::Approx(0.05));
    CHECK(res.z == doctest::Approx(2.0));
    CHECK(res.p == doctest::Approx(0.0455).epsilon(2e-3));
    CHECK_THROWS_AS(spillover_test(p, cov, 1, 1), IndexOutOfRange);
}

TEST_CASE("spillover power on the catalog model") {
    // true off-diagonal coefficient 0.045 should be detected often
    const GeneralParams truth = dgp_catalog("DGP1");
    int rejections = 0;
    const int reps = 12;
    for (int rep = 0; rep < reps; ++rep) {
        const MatrixXd panel = simulate_path(truth, 2000, 200, InnovationSpec{}, 9000 + rep).panel;
        FitOptions opts;
        opts.n_starts = 2;
        opts.seed = 100 + static_cast<std::uint64_t>(rep);
        opts.max_iter = 300;
        const FitReport fit = fit_general(panel, truth.order, opts);
        const CovReport cov = asymptotic_cov(fit, panel);
        const SpilloverResult res = spillover_test(fit.params, cov, 1, 0);
        if (res.p < 0.05) ++rejections;
    }
    CHECK(rejections * 2 > reps);  // power above one half
}
