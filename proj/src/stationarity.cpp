#include "mgarch/stationarity.hpp"

#include <algorithm>
#include <cmath>

namespace mgarch {

namespace {

double induced_norm(const MatrixXd& a, MatrixNormKind kind) {
    switch (kind) {
        case MatrixNormKind::One:
            return a.cwiseAbs().colwise().sum().maxCoeff();
        case MatrixNormKind::Inf:
            return a.cwiseAbs().rowwise().sum().maxCoeff();
        case MatrixNormKind::Two: {
            Eigen::JacobiSVD<MatrixXd> svd(a);
            return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
        }
    }
    return 0.0;
}

}  // namespace

double stationarity_sum(const GeneralParams& p, MatrixNormKind norm) {
    double sum = 0.0;
    for (int k = 0; k < p.order.r; ++k)
        sum += induced_norm(p.G0[static_cast<std::size_t>(k)], norm) / (1.0 - std::abs(p.lambda[k]));
    for (int k = 0; k < p.order.s; ++k)
        sum += (induced_norm(p.G1[static_cast<std::size_t>(k)], norm) +
                induced_norm(p.G2[static_cast<std::size_t>(k)], norm)) /
               (1.0 - p.gamma[k]);
    return sum;
}

StationarityReport check_stationarity(const GeneralParams& p) {
    StationarityReport rep;
    rep.sum_one = stationarity_sum(p, MatrixNormKind::One);
    rep.sum_inf = stationarity_sum(p, MatrixNormKind::Inf);
    rep.sum_two = stationarity_sum(p, MatrixNormKind::Two);
    rep.min_sum = std::min({rep.sum_one, rep.sum_inf, rep.sum_two});
    rep.satisfied = rep.min_sum < 1.0;
    return rep;
}

}  // namespace mgarch
