#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "mgarch/simulate.hpp"
#include "mgarch/stationarity.hpp"
#include "testutil.hpp"

using namespace mgarch;

TEST_CASE("catalog value under the row-sum norm") {
    const GeneralParams p = dgp_catalog("DGP1");
    CHECK(stationarity_sum(p, MatrixNormKind::Inf) == doctest::Approx(0.45));
    CHECK(check_stationarity(p).satisfied);
}

TEST_CASE("zero coefficients give a zero sum") {
    GeneralParams p;
    p.order = ModelOrder(3, 1, 0);
    p.omega_bar = VectorXd::Zero(3);
    p.lambda = VectorXd::Constant(1, 0.5);
    p.G0.push_back(MatrixXd::Zero(3, 3));
    p.beta1 = 0.05;
    p.beta2 = 0.6;
    p.Rbar = MatrixXd::Identity(3, 3);
    const StationarityReport rep = check_stationarity(p);
    CHECK(rep.min_sum == 0.0);
    CHECK(rep.satisfied);
}

TEST_CASE("tripled coefficients fail the row-sum check") {
    GeneralParams p = dgp_catalog("DGP1");
    p.G0[0] *= 3.0;
    CHECK(stationarity_sum(p, MatrixNormKind::Inf) == doctest::Approx(1.35));
    CHECK_FALSE(stationarity_sum(p, MatrixNormKind::Inf) < 1.0);
}

TEST_CASE("sum is absolutely homogeneous in the coefficient blocks") {
    std::mt19937_64 eng(3);
    const GeneralParams p = testutil::random_params(ModelOrder(4, 2, 1), eng);
    for (MatrixNormKind norm :
         {MatrixNormKind::One, MatrixNormKind::Inf, MatrixNormKind::Two}) {
        const double base = stationarity_sum(p, norm);
        GeneralParams scaled = p;
        for (auto& g : scaled.G0) g *= 0.5;
        for (auto& g : scaled.G1) g *= 0.5;
        for (auto& g : scaled.G2) g *= 0.5;
        CHECK(stationarity_sum(scaled, norm) == doctest::Approx(0.5 * base));
    }
}

TEST_CASE("minimum over norms never exceeds an individual norm") {
    std::mt19937_64 eng(9);
    for (int rep = 0; rep < 10; ++rep) {
        const GeneralParams p = testutil::random_params(ModelOrder(3, 1, 1), eng, 0.2);
        const StationarityReport r = check_stationarity(p);
        CHECK(r.min_sum <= r.sum_one + 1e-15);
        CHECK(r.min_sum <= r.sum_inf + 1e-15);
        CHECK(r.min_sum <= r.sum_two + 1e-15);
    }
}

TEST_CASE("every catalog entry satisfies the condition") {
    for (const char* name : {"DGP1", "DGP2", "DGP3", "DGP4", "DGP5"}) {
        const GeneralParams p = dgp_catalog(name);
        CHECK_MESSAGE(check_stationarity(p).satisfied, name);
    }
}
