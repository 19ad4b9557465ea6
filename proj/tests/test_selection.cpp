#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mgarch/selection.hpp"
#include "mgarch/simulate.hpp"
#include "testutil.hpp"

using namespace mgarch;

TEST_CASE("criterion arithmetic") {
    FitReport fit;
    fit.params.order = ModelOrder(2, 1, 0);  // d = 10
    fit.neg_loglik = 100.0;
    fit.n = 100;
    CHECK(bic(fit) == doctest::Approx(200.0 + 10.0 * std::log(100.0)));
    CHECK(bic(fit) == doctest::Approx(246.052).epsilon(1e-5));

    SUBCASE("equal likelihoods favor the smaller parameter count") {
        FitReport small = fit;
        FitReport big = fit;
        big.params.order = ModelOrder(2, 2, 0);
        CHECK(bic(small) < bic(big));
    }
    SUBCASE("factor mode uses the factor dimension") {
        FitReport lr = fit;
        lr.params.order = ModelOrder(5, 1, 0);
        LowRankParams stub;
        stub.order = lr.params.order;
        lr.lowrank = stub;
        const double expected = 200.0 + lr.params.order.dim_lowrank() * std::log(100.0);
        CHECK(bic(lr) == doctest::Approx(expected));
    }
}

TEST_CASE("grid enumeration matches the order constraint") {
    const GeneralParams truth = dgp_catalog("DGP1");
    const MatrixXd panel = simulate_path(truth, 800, 200, InnovationSpec{}, 33).panel;
    FitOptions opts;
    opts.n_starts = 2;
    opts.seed = 3;
    opts.max_iter = 250;
    opts.threads = 2;
    const SelectionResult sel = select_order(panel, 2, false, opts);
    REQUIRE(sel.table.size() == 3);
    bool saw10 = false, saw20 = false, saw01 = false;
    for (const auto& cell : sel.table) {
        if (cell.r == 1 && cell.s == 0) saw10 = true;
        if (cell.r == 2 && cell.s == 0) saw20 = true;
        if (cell.r == 0 && cell.s == 1) saw01 = true;
    }
    CHECK(saw10);
    CHECK(saw20);
    CHECK(saw01);
    CHECK(sel.r_hat == 1);
    CHECK(sel.s_hat == 0);

    SUBCASE("nested orders attain no worse likelihood") {
        double nll10 = 0, nll20 = 0;
        for (const auto& cell : sel.table) {
            if (cell.r == 1 && cell.s == 0) nll10 = cell.nll;
            if (cell.r == 2 && cell.s == 0) nll20 = cell.nll;
        }
        CHECK(nll20 <= nll10 + 1e-3 * std::max(1.0, std::abs(nll10)));
    }
}

TEST_CASE("selection is deterministic given seed") {
    const GeneralParams truth = dgp_catalog("DGP1");
    const MatrixXd panel = simulate_path(truth, 600, 200, InnovationSpec{}, 55).panel;
    FitOptions opts;
    opts.n_starts = 2;
    opts.seed = 17;
    opts.max_iter = 150;
    const SelectionResult a = select_order(panel, 2, false, opts);
    const SelectionResult b = select_order(panel, 2, false, opts);
    CHECK(a.r_hat == b.r_hat);
    CHECK(a.s_hat == b.s_hat);
    for (std::size_t i = 0; i < a.table.size(); ++i) {
        CHECK(a.table[i].nll == b.table[i].nll);
        CHECK(a.table[i].bic_value == b.table[i].bic_value);
    }
}

TEST_CASE("white noise with small samples favors the smallest model") {
    // pure noise: every dynamic term is spurious, so the penalty decides
    GeneralParams flat;
    flat.order = ModelOrder(2, 0, 0);
    flat.omega_bar = VectorXd::Zero(2);
    flat.beta1 = 0.0;
    flat.beta2 = 0.0;
    flat.Rbar = MatrixXd::Identity(2, 2);
    flat.validate();
    const MatrixXd panel = simulate_path(flat, 300, 50, InnovationSpec{}, 71).panel;
    FitOptions opts;
    opts.n_starts = 2;
    opts.seed = 23;
    opts.max_iter = 200;
    const SelectionResult sel = select_order(panel, 2, false, opts);
    // the smallest-dimension cell in the grid is (1,0)
    CHECK(sel.r_hat == 1);
    CHECK(sel.s_hat == 0);
}

TEST_CASE("o_max validation") {
    const MatrixXd panel = MatrixXd::Random(100, 2);
    FitOptions opts;
    CHECK_THROWS_AS(select_order(panel, 0, false, opts), ConstraintViolation);
    CHECK_THROWS_AS(select_order(panel, 3, false, opts), ConstraintViolation);
}

TEST_CASE("csv table emission") {
    SelectionResult sel;
    OrderCell a;
    a.r = 1;
    a.s = 0;
    a.d_bar = 10;
    a.nll = 123.5;
    a.bic_value = 300.25;
    a.converged = true;
    a.valid = true;
    OrderCell b;
    b.r = 0;
    b.s = 1;
    b.d_bar = 15;
    b.valid = false;
    sel.table = {a, b};
    const std::string csv = selection_to_csv(sel);
    CHECK(csv.find("r,s,d_bar,neg_loglik,bic,converged\n") == 0);
    CHECK(csv.find("1,0,10,123.5,300.25,1") != std::string::npos);
    CHECK(csv.find("0,1,15,,,0") != std::string::npos);
}
